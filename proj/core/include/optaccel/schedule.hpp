#pragma once

#include "optaccel/types.hpp"

#include <cstdint>
#include <string>

namespace optaccel {

/// Stepsize schedule of the accelerated method:
///   gamma   = min{1/(12H), b/(24H(T+1)), sqrt(b B^2 / (noise_sq T^3))}
///   beta_t  = 1 + t/6
///   gamma_t = gamma (t + 1)
/// The third branch is inactive when noise_sq == 0.
struct StepSchedule {
  double gamma = 0.0;
  std::int64_t T = 0;
  std::int64_t b = 0;
  double H = 0.0;
  double B = 0.0;
  double noise_sq = 0.0;

  double beta(std::int64_t t) const noexcept { return 1.0 + static_cast<double>(t) / 6.0; }
  double step(std::int64_t t) const noexcept { return gamma * static_cast<double>(t + 1); }
};

StepSchedule make_schedule(double H, std::int64_t b, std::int64_t T, double B, double noise_sq);

/// Hex SHA-256 over the schedule parameters, printed with round-trip precision.
std::string schedule_hash(const StepSchedule& s);

/// Euclidean projection onto the closed ball of radius B. Zero maps to zero.
Vector project_ball(const Vector& w, double B);
void project_ball_inplace(Vector& w, double B);

}  // namespace optaccel
