#include "optaccel/rng.hpp"

#include <cmath>
#include <numbers>

namespace optaccel {

std::uint64_t mix64(std::uint64_t z) noexcept {
  // SplitMix64 finalizer.
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t key) noexcept : key_(mix64(key ^ 0x6a09e667f3bcc909ULL)) {}

std::uint64_t CounterRng::bits(std::uint64_t t, std::uint64_t i, std::uint32_t k) const noexcept {
  std::uint64_t h = mix64(key_ ^ (t * 0xd1b54a32d192ed03ULL));
  h = mix64(h ^ (i * 0x8cb92ba72f3d8dd7ULL));
  return mix64(h + k);
}

double CounterRng::uniform(std::uint64_t t, std::uint64_t i, std::uint32_t k) const noexcept {
  const std::uint64_t m = bits(t, i, k) >> 11;
  return (static_cast<double>(m) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t t, std::uint64_t i, std::uint32_t k) const noexcept {
  const double u1 = uniform(t, i, k);
  const double u2 = uniform(t, i, k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace optaccel
