#pragma once

#include <cstdint>
#include <functional>

namespace optaccel {

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Indices are handed
/// out in increasing order; fn must write only to per-index state. The first
/// exception thrown by fn is rethrown after all threads join.
void parallel_for(std::int64_t n, std::int64_t workers, const std::function<void(std::int64_t)>& fn);

}  // namespace optaccel
