#pragma once

#include "optaccel/problem.hpp"

#include <vector>

namespace optaccel {

/// x uniform over n_atoms coordinate atoms sqrt(H) e_j, y = <w0, x> with a
/// planted ||w0|| = B. Interpolating: L* = 0, sigma*^2 = 0.
ProblemPtr make_interpolation_least_squares(Index d, Index n_atoms, double H, double B,
                                            std::uint64_t seed);

/// x uniform over {sqrt(H) e_1, ..., sqrt(H) e_2n}, y = <x, B/sqrt(2n) sigma>.
ProblemPtr make_sign_vector_problem(Index n, double H, double B, const std::vector<int>& signs);

/// One-dimensional: (0, 0) with probability 1 - p, otherwise x = sqrt(H) and
/// y ~ N(sign sqrt(H) B, s^2).
ProblemPtr make_gaussian_spike_problem(double H, double B, double p, double s, int sign,
                                       std::uint64_t seed);

/// Rank-r least squares with nonzero second-moment eigenvalues spread
/// geometrically over [lambda, H / r] and L(0) = Delta. Requires r * lambda <= H
/// so that every atom has squared norm H.
ProblemPtr make_growth_problem(Index d, Index rank, double lambda, double H, double Delta,
                               std::uint64_t seed);

/// Deterministic quadratic l(w; z) = L(w) = 1/2 (w - w*)' diag(mu) (w - w*) with
/// mu log-spaced from H down to H / condition and w* = B / sqrt(d) * 1.
ProblemPtr make_noiseless_quadratic(Index d, double H, double B, double condition);

/// Builds any family above from its declarative record. Throws ConfigError.
ProblemPtr make_problem(const ProblemConfig& config);

/// Names accepted by make_problem.
const std::vector<std::string>& problem_families();

}  // namespace optaccel
