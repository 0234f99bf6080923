#include "optaccel/schedule.hpp"

#include "optaccel/hashing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace optaccel {

StepSchedule make_schedule(double H, std::int64_t b, std::int64_t T, double B, double noise_sq) {
  if (!(H > 0.0)) throw std::invalid_argument("make_schedule: H must be positive");
  if (!(B > 0.0)) throw std::invalid_argument("make_schedule: B must be positive");
  if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
  if (b < 1) throw std::invalid_argument("make_schedule: b must be >= 1");
  if (!(noise_sq >= 0.0)) throw std::invalid_argument("make_schedule: noise_sq must be >= 0");

  const double bd = static_cast<double>(b);
  const double Td = static_cast<double>(T);
  const double g1 = 1.0 / (12.0 * H);
  const double g2 = bd / (24.0 * H * (Td + 1.0));
  const double g3 = noise_sq > 0.0 ? std::sqrt(bd * B * B / (noise_sq * Td * Td * Td))
                                   : std::numeric_limits<double>::infinity();
  return StepSchedule{std::min({g1, g2, g3}), T, b, H, B, noise_sq};
}

std::string schedule_hash(const StepSchedule& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "gamma=%.17g;T=%lld;b=%lld;H=%.17g;B=%.17g;noise_sq=%.17g",
                s.gamma, static_cast<long long>(s.T), static_cast<long long>(s.b), s.H, s.B,
                s.noise_sq);
  return sha256_hex(buf);
}

void project_ball_inplace(Vector& w, double B) {
  if (!(B > 0.0)) throw std::invalid_argument("project_ball: B must be positive");
  const double n = w.norm();
  if (n > B) w *= B / n;
}

Vector project_ball(const Vector& w, double B) {
  Vector out = w;
  project_ball_inplace(out, B);
  return out;
}

}  // namespace optaccel
