#pragma once

#include "optaccel/rng.hpp"
#include "optaccel/types.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>

namespace optaccel {

/// Declarative description of a problem instance: family name, numeric
/// parameters and the construction seed.
struct ProblemConfig {
  std::string family;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

void to_json(nlohmann::json& j, const ProblemConfig& c);
/// Strict: rejects keys other than family / params / seed.
void from_json(const nlohmann::json& j, ProblemConfig& c);

/// Hex SHA-256 of the canonical JSON form of the config.
std::string config_hash(const ProblemConfig& c);

/// Constants certifying which assumptions a problem satisfies.
///   H             per-sample smoothness
///   B             norm of a minimizer
///   Lstar         minimum expected loss
///   sigma_star_sq E||grad l(w*; z) - grad L(w*)||^2
///   lambda        quadratic-growth constant, 0 when not satisfied
///   Delta         L(0) - L*
struct ProblemMeta {
  double H = 0.0;
  double B = 0.0;
  double Lstar = 0.0;
  double sigma_star_sq = 0.0;
  double lambda = 0.0;
  double Delta = 0.0;
  std::optional<Vector> wstar;
};

struct DataPoint {
  Vector x;
  double y = 0.0;
};

/// Column-major minibatch: sample i is (x.col(i), y(i)). Problems whose loss
/// does not depend on the sample keep `x` with zero rows.
struct Batch {
  Matrix x;
  Vector y;

  Index size() const noexcept { return y.size(); }
  DataPoint at(Index i) const;
};

/// Closed-form moments of a least-squares objective,
/// L(w) = 1/2 w'Sw - c'w + e/2 with S = E[xx'], c = E[xy], e = E[y^2].
struct QuadraticMoments {
  Matrix second_moment;
  Vector cross_moment;
  double label_energy = 0.0;
};

/// Sampled stochastic objective L(w) = E_z l(w; z). Instances are immutable
/// after construction and may be shared across threads.
class Problem {
 public:
  virtual ~Problem() = default;

  Index dimension() const noexcept { return dimension_; }
  const ProblemConfig& config() const noexcept { return config_; }
  const ProblemMeta& meta() const noexcept { return meta_; }
  const QuadraticMoments& moments() const noexcept { return moments_; }
  bool has_exact_loss() const noexcept { return true; }

  /// Fills `out` with b i.i.d. samples keyed by (rng, t, 0..b-1).
  virtual void sample_into(Batch& out, Index b, const CounterRng& rng, std::uint64_t t) const = 0;

  virtual double loss(const Vector& w, const DataPoint& z) const = 0;
  virtual Vector gradient(const Vector& w, const DataPoint& z) const = 0;

  /// Mean of per-sample gradients, accumulated in sample index order.
  virtual void minibatch_gradient_into(Vector& g, const Vector& w, const Batch& batch) const;

  /// L(w) - L*, evaluated as 1/2 (w - w*)' S (w - w*).
  double excess_loss(const Vector& w) const;
  double expected_loss(const Vector& w) const { return meta_.Lstar + excess_loss(w); }
  Vector expected_gradient(const Vector& w) const;

 protected:
  Problem(ProblemConfig config, Index dimension, ProblemMeta meta, QuadraticMoments moments);

 private:
  ProblemConfig config_;
  Index dimension_;
  ProblemMeta meta_;
  QuadraticMoments moments_;
};

using ProblemPtr = std::shared_ptr<const Problem>;

/// l(w; (x, y)) = 1/2 (<w, x> - y)^2.
class LeastSquaresProblem : public Problem {
 public:
  double loss(const Vector& w, const DataPoint& z) const override;
  Vector gradient(const Vector& w, const DataPoint& z) const override;
  void minibatch_gradient_into(Vector& g, const Vector& w, const Batch& batch) const override;

 protected:
  using Problem::Problem;
};

/// Draws b samples and advances the cursor by one batch.
Batch sample_batch(const Problem& problem, Index b, RngState& state);
void sample_batch_into(const Problem& problem, Index b, RngState& state, Batch& out);

Vector minibatch_gradient(const Problem& problem, const Vector& w, const Batch& batch);

}  // namespace optaccel
