#include "optaccel/oracles.hpp"

#include "optaccel/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace optaccel {
namespace {

constexpr double kRankTol = 1e-10;

struct Spectrum {
  Vector values;
  Matrix vectors;
  double cutoff = 0.0;
};

Spectrum spectrum_of(const Problem& problem) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(problem.moments().second_moment);
  Spectrum s{es.eigenvalues(), es.eigenvectors(), 0.0};
  s.cutoff = kRankTol * std::max(0.0, s.values.maxCoeff());
  return s;
}

// Relative violation of lhs <= rhs.
double relative_violation(double lhs, double rhs) {
  return (lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace

ExactMinimum exact_min(const Problem& problem) {
  if (dynamic_cast<const LeastSquaresProblem*>(&problem) == nullptr)
    throw std::invalid_argument("exact_min: not a least-squares problem");
  const Spectrum s = spectrum_of(problem);
  const Vector& c = problem.moments().cross_moment;
  const Vector proj = s.vectors.transpose() * c;
  Vector coeff = Vector::Zero(proj.size());
  for (Index i = 0; i < proj.size(); ++i)
    if (s.values(i) > s.cutoff) coeff(i) = proj(i) / s.values(i);
  ExactMinimum out;
  out.wstar = s.vectors * coeff;
  out.Lstar = 0.5 * (problem.moments().label_energy - proj.dot(coeff));
  out.Lstar = std::max(0.0, out.Lstar);
  return out;
}

Matrix range_projector(const Problem& problem) {
  const Spectrum s = spectrum_of(problem);
  Matrix p = Matrix::Zero(problem.dimension(), problem.dimension());
  for (Index i = 0; i < s.values.size(); ++i)
    if (s.values(i) > s.cutoff) p.noalias() += s.vectors.col(i) * s.vectors.col(i).transpose();
  return p;
}

double distance_to_solutions(const Problem& problem, const Vector& w) {
  return (range_projector(problem) * (w - *problem.meta().wstar)).norm();
}

Estimate variance_at(const Problem& problem, const Vector& w, std::int64_t n_samples,
                     std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("variance_at: n_samples must be >= 2");
  const Vector mean_grad = problem.expected_gradient(w);
  constexpr std::int64_t kChunk = 4096;
  RngState rng{seed, 0};
  Batch batch;
  double mean = 0.0;
  double m2 = 0.0;
  std::int64_t n = 0;
  while (n < n_samples) {
    const std::int64_t b = std::min(kChunk, n_samples - n);
    sample_batch_into(problem, b, rng, batch);
    for (Index i = 0; i < batch.size(); ++i) {
      const double v = (problem.gradient(w, batch.at(i)) - mean_grad).squaredNorm();
      ++n;
      const double delta = v - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta * (v - mean);
    }
  }
  const double var = m2 / static_cast<double>(n - 1);
  return Estimate{mean, std::sqrt(var / static_cast<double>(n))};
}

Vector uniform_in_ball(Index d, double r, const CounterRng& rng, std::uint64_t t, std::uint64_t i) {
  Vector v(d);
  for (Index k = 0; k < d; ++k) v(k) = rng.normal(t, i, static_cast<std::uint32_t>(2 * k));
  const double n = v.norm();
  if (n == 0.0) return Vector::Zero(d);
  const double u = rng.uniform(t, i, static_cast<std::uint32_t>(2 * d));
  return v * (r * std::pow(u, 1.0 / static_cast<double>(d)) / n);
}

AssumptionReport certify_assumptions(const Problem& problem, std::int64_t n_probes,
                                     std::uint64_t seed, double rel_tol, double growth_tol) {
  if (n_probes < 1) throw std::invalid_argument("certify_assumptions: n_probes must be >= 1");
  const ProblemMeta& meta = problem.meta();
  const Index d = problem.dimension();
  const double radius = 2.0 * std::max(meta.B, 1e-12);
  const CounterRng probes(seed ^ 0x5bd1e9955bd1e995ULL);
  RngState data{seed, 0};
  Batch batch;
  sample_batch_into(problem, n_probes, data, batch);

  AssumptionReport rep;
  rep.probes = n_probes;
  rep.nonnegativity = rep.convexity = rep.smoothness = rep.gradient_lipschitz = -1.0;
  rep.growth_checked = meta.lambda > 0.0;
  rep.growth = rep.growth_checked ? -1.0 : 0.0;
  const Matrix proj = rep.growth_checked ? range_projector(problem) : Matrix();

  for (std::int64_t k = 0; k < n_probes; ++k) {
    const auto kk = static_cast<std::uint64_t>(k);
    const Vector w = uniform_in_ball(d, radius, probes, 0, kk);
    const Vector u = uniform_in_ball(d, radius, probes, 1, kk);
    const DataPoint z = batch.at(static_cast<Index>(k));
    const double lw = problem.loss(w, z);
    const double lu = problem.loss(u, z);
    const Vector gw = problem.gradient(w, z);
    const Vector gu = problem.gradient(u, z);
    const Vector diff = w - u;
    const double lin = lu + gu.dot(diff);
    const double quad = 0.5 * meta.H * diff.squaredNorm();

    rep.nonnegativity = std::max(rep.nonnegativity, relative_violation(0.0, lw));
    rep.convexity = std::max(rep.convexity, relative_violation(lin, lw));
    rep.smoothness = std::max(rep.smoothness, relative_violation(lw, lin + quad));
    rep.gradient_lipschitz = std::max(
        rep.gradient_lipschitz, relative_violation((gw - gu).norm(), meta.H * diff.norm()));

    if (rep.growth_checked) {
      const double dist = (proj * (w - *meta.wstar)).norm();
      const double gap = problem.excess_loss(w) - 0.5 * meta.lambda * dist * dist;
      rep.growth = std::max(rep.growth, -gap);
    }
  }
  rep.passed = rep.nonnegativity <= rel_tol && rep.convexity <= rel_tol &&
               rep.smoothness <= rel_tol && rep.gradient_lipschitz <= rel_tol &&
               (!rep.growth_checked || rep.growth <= growth_tol);
  return rep;
}

ProjectionCheck check_projection_lemma(const ProjectionInstance& in,
                                       const std::vector<Vector>& probes, double tol) {
  if (!(in.B > 0.0)) throw std::invalid_argument("check_projection_lemma: B must be positive");
  const Vector w_next = project_ball(in.w_t - in.gamma * in.g, in.B);
  const auto violation = [&](const Vector& w) {
    const double lhs = in.gamma * in.g.dot(w_next - in.w_md);
    const double rhs = in.gamma * in.g.dot(w - in.w_md) + 0.5 * (w - in.w_t).squaredNorm() -
                       0.5 * (w - w_next).squaredNorm() - 0.5 * (w_next - in.w_t).squaredNorm();
    return lhs - rhs;
  };
  ProjectionCheck out;
  out.max_violation = -std::numeric_limits<double>::infinity();
  for (const Vector& w : probes) {
    if (w.norm() > in.B * (1.0 + 1e-12))
      throw std::invalid_argument("check_projection_lemma: probe outside the B-ball");
    out.max_violation = std::max(out.max_violation, violation(w));
  }
  if (probes.empty()) out.max_violation = 0.0;
  out.equality_gap = std::abs(violation(w_next));
  out.passed = out.max_violation <= tol;
  return out;
}

}  // namespace optaccel
