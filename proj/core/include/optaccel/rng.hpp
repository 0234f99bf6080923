#pragma once

#include <cstdint>

namespace optaccel {

/// Counter-based random stream. Every draw is a pure function of
/// (key, t, i, k), so a minibatch can be regenerated from its coordinates
/// without replaying the stream that preceded it.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept;

  std::uint64_t bits(std::uint64_t t, std::uint64_t i, std::uint32_t k) const noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t t, std::uint64_t i, std::uint32_t k) const noexcept;

  /// Standard normal via Box-Muller; consumes slots k and k + 1.
  double normal(std::uint64_t t, std::uint64_t i, std::uint32_t k) const noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

/// Per-run sampling cursor. `position` counts minibatches drawn so far and is
/// the `t` coordinate of the next batch.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t position = 0;

  CounterRng stream() const noexcept { return CounterRng(seed); }
};

}  // namespace optaccel
