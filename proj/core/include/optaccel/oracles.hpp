#pragma once

#include "optaccel/problem.hpp"

#include <vector>

namespace optaccel {

struct ExactMinimum {
  Vector wstar;
  double Lstar = 0.0;
};

/// Minimum-norm minimizer of a least-squares problem from its closed-form
/// moments, w* = S^+ c and L* = (e - c'S^+c)/2. Eigenvalues below 1e-10 of the
/// largest are treated as zero. Throws std::invalid_argument for other losses.
ExactMinimum exact_min(const Problem& problem);

/// Orthogonal projector onto range(S), same rank rule as exact_min.
Matrix range_projector(const Problem& problem);

/// Distance from w to the minimizer set w* + null(S).
double distance_to_solutions(const Problem& problem, const Vector& w);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of E||grad l(w; z) - grad L(w)||^2 with standard error
/// sd / sqrt(n). Samples are drawn from the stream seeded by `seed`.
Estimate variance_at(const Problem& problem, const Vector& w, std::int64_t n_samples,
                     std::uint64_t seed);

struct AssumptionReport {
  std::int64_t probes = 0;
  /// Largest relative violation of each inequality (<= 0 means satisfied).
  double nonnegativity = 0.0;
  double convexity = 0.0;
  double smoothness = 0.0;
  double gradient_lipschitz = 0.0;
  /// Largest absolute violation of L(w) - L* >= lambda/2 dist(w)^2; only
  /// evaluated when lambda > 0.
  double growth = 0.0;
  bool growth_checked = false;
  bool passed = false;
};

/// Probes per-sample non-negativity, convexity and H-smoothness on pairs drawn
/// uniformly from the ball of radius 2B, plus quadratic growth when lambda > 0.
AssumptionReport certify_assumptions(const Problem& problem, std::int64_t n_probes,
                                     std::uint64_t seed, double rel_tol = 1e-8,
                                     double growth_tol = 1e-10);

struct ProjectionInstance {
  Vector w_t;
  Vector w_md;
  Vector g;
  double gamma = 0.0;
  double B = 0.0;
};

struct ProjectionCheck {
  bool passed = false;
  double max_violation = 0.0;
  /// |lhs - rhs| at the probe w = w_{t+1}.
  double equality_gap = 0.0;
};

/// Evaluates, for each probe w in the B-ball,
///   gamma<g, w+ - w_md> <= gamma<g, w - w_md> + |w - w_t|^2/2 - |w - w+|^2/2 - |w+ - w_t|^2/2
/// with w+ = Proj_B(w_t - gamma g). Passes when every violation is <= tol.
ProjectionCheck check_projection_lemma(const ProjectionInstance& instance,
                                       const std::vector<Vector>& probes, double tol = 1e-9);

/// Uniform draw from the ball of radius r, keyed by (rng, t, i).
Vector uniform_in_ball(Index d, double r, const CounterRng& rng, std::uint64_t t, std::uint64_t i);

}  // namespace optaccel
