#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace optaccel {

/// rate_curve, speedup_curve, stage_decay.
const std::vector<std::string>& plotdata_kinds();

/// Tidy CSV built from summary.csv (rate_curve), speedup.csv (speedup_curve)
/// or restarted trace CSVs (stage_decay). Columns are listed in docs/plotdata.md.
/// Throws std::invalid_argument for an unknown kind and std::runtime_error
/// naming any missing or malformed input.
std::string emit_plotdata(const std::string& kind,
                          const std::vector<std::filesystem::path>& inputs);

}  // namespace optaccel
