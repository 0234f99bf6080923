#include "optaccel/families.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace optaccel {
namespace {

using nlohmann::json;

// Construction draws use their own key space so they never alias run streams.
CounterRng construction_stream(std::uint64_t seed) { return CounterRng(seed ^ 0x9e3779b97f4a7c15ULL); }

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Smallest eigenvalue above a relative cutoff of the largest.
double smallest_nonzero_eigenvalue(const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double cutoff = 1e-10 * std::max(ev.maxCoeff(), 0.0);
  double out = 0.0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cutoff && (out == 0.0 || ev(i) < out)) out = ev(i);
  return out;
}

/// Finite distribution over (atom, label) pairs.
class AtomLeastSquares final : public LeastSquaresProblem {
 public:
  AtomLeastSquares(ProblemConfig config, Matrix atoms, Vector labels, Vector probs,
                   ProblemMeta meta)
      : LeastSquaresProblem(std::move(config), atoms.rows(), std::move(meta),
                            moments_of(atoms, labels, probs)),
        atoms_(std::move(atoms)),
        labels_(std::move(labels)),
        uniform_((probs.array() == probs(0)).all()) {
    cdf_.resize(probs.size());
    double acc = 0.0;
    for (Index k = 0; k < probs.size(); ++k) cdf_[k] = (acc += probs(k));
    cdf_.back() = 1.0;
  }

  void sample_into(Batch& out, Index b, const CounterRng& rng, std::uint64_t t) const override {
    const Index m = atoms_.cols();
    out.x.resize(atoms_.rows(), b);
    out.y.resize(b);
    for (Index i = 0; i < b; ++i) {
      const double u = rng.uniform(t, static_cast<std::uint64_t>(i), 0);
      Index k;
      if (uniform_) {
        k = std::min<Index>(m - 1, static_cast<Index>(u * static_cast<double>(m)));
      } else {
        k = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
        k = std::min<Index>(k, m - 1);
      }
      out.x.col(i) = atoms_.col(k);
      out.y(i) = labels_(k);
    }
  }

  static QuadraticMoments moments_of(const Matrix& atoms, const Vector& labels,
                                     const Vector& probs) {
    QuadraticMoments mo;
    mo.second_moment = atoms * probs.asDiagonal() * atoms.transpose();
    mo.cross_moment = atoms * probs.cwiseProduct(labels);
    mo.label_energy = probs.dot(labels.cwiseAbs2());
    return mo;
  }

 private:
  Matrix atoms_;
  Vector labels_;
  bool uniform_;
  std::vector<double> cdf_;
};

class GaussianSpike final : public LeastSquaresProblem {
 public:
  GaussianSpike(ProblemConfig config, double H, double B, double p, double s, int sign)
      : LeastSquaresProblem(std::move(config), 1, meta_of(H, B, p, s, sign),
                            moments_of(H, B, p, s, sign)),
        root_h_(std::sqrt(H)),
        mean_y_(sign * std::sqrt(H) * B),
        p_(p),
        s_(s) {}

  void sample_into(Batch& out, Index b, const CounterRng& rng, std::uint64_t t) const override {
    out.x.resize(1, b);
    out.y.resize(b);
    for (Index i = 0; i < b; ++i) {
      const auto ii = static_cast<std::uint64_t>(i);
      if (rng.uniform(t, ii, 0) < p_) {
        out.x(0, i) = root_h_;
        out.y(i) = mean_y_ + s_ * rng.normal(t, ii, 1);
      } else {
        out.x(0, i) = 0.0;
        out.y(i) = 0.0;
      }
    }
  }

 private:
  static ProblemMeta meta_of(double H, double B, double p, double s, int sign) {
    ProblemMeta m;
    m.H = H;
    m.B = B;
    m.Lstar = p * s * s / 2.0;
    m.sigma_star_sq = p * H * s * s;
    m.lambda = H * p;
    m.Delta = p * H * B * B / 2.0;
    m.wstar = Vector::Constant(1, sign * B);
    return m;
  }
  static QuadraticMoments moments_of(double H, double B, double p, double s, int sign) {
    QuadraticMoments mo;
    mo.second_moment = Matrix::Constant(1, 1, p * H);
    mo.cross_moment = Vector::Constant(1, sign * p * H * B);
    mo.label_energy = p * (H * B * B + s * s);
    return mo;
  }

  double root_h_;
  double mean_y_;
  double p_;
  double s_;
};

class NoiselessQuadratic final : public Problem {
 public:
  NoiselessQuadratic(ProblemConfig config, Vector mu, Vector wstar, double H)
      : Problem(std::move(config), mu.size(), meta_of(mu, wstar, H), moments_of(mu, wstar)),
        mu_(std::move(mu)),
        wstar_(std::move(wstar)) {}

  void sample_into(Batch& out, Index b, const CounterRng&, std::uint64_t) const override {
    out.x.resize(0, b);
    out.y.setZero(b);
  }

  double loss(const Vector& w, const DataPoint&) const override {
    const Vector e = w - wstar_;
    return 0.5 * e.dot(mu_.cwiseProduct(e));
  }
  Vector gradient(const Vector& w, const DataPoint&) const override {
    return mu_.cwiseProduct(w - wstar_);
  }
  void minibatch_gradient_into(Vector& g, const Vector& w, const Batch& batch) const override {
    if (batch.size() == 0) throw std::invalid_argument("minibatch_gradient: empty batch");
    g = mu_.cwiseProduct(w - wstar_);
  }

 private:
  static ProblemMeta meta_of(const Vector& mu, const Vector& wstar, double H) {
    ProblemMeta m;
    m.H = H;
    m.B = wstar.norm();
    m.Lstar = 0.0;
    m.sigma_star_sq = 0.0;
    m.lambda = mu.minCoeff();
    m.Delta = 0.5 * wstar.dot(mu.cwiseProduct(wstar));
    m.wstar = wstar;
    return m;
  }
  static QuadraticMoments moments_of(const Vector& mu, const Vector& wstar) {
    QuadraticMoments mo;
    mo.second_moment = mu.asDiagonal();
    mo.cross_moment = mu.cwiseProduct(wstar);
    mo.label_energy = wstar.dot(mo.cross_moment);
    return mo;
  }

  Vector mu_;
  Vector wstar_;
};

ProblemMeta interpolating_meta(const Matrix& atoms, const Vector& probs, const Vector& wstar,
                               double H, double B) {
  ProblemMeta m;
  m.H = H;
  m.B = B;
  m.Lstar = 0.0;
  m.sigma_star_sq = 0.0;
  const Matrix sigma = atoms * probs.asDiagonal() * atoms.transpose();
  m.lambda = smallest_nonzero_eigenvalue(sigma);
  m.Delta = 0.5 * wstar.dot(sigma * wstar);
  m.wstar = wstar;
  return m;
}

// ---- config plumbing ----

void check_keys(const json& params, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("problem.params." + key, "unknown parameter");
  }
}

double get_number(const json& params, const char* key) {
  if (!params.contains(key)) throw ConfigError(std::string("problem.params.") + key, "missing");
  const json& v = params.at(key);
  if (!v.is_number()) throw ConfigError(std::string("problem.params.") + key, "expected a number");
  return v.get<double>();
}

double get_number(const json& params, const char* key, double fallback) {
  return params.contains(key) ? get_number(params, key) : fallback;
}

Index get_index(const json& params, const char* key) {
  if (!params.contains(key)) throw ConfigError(std::string("problem.params.") + key, "missing");
  const json& v = params.at(key);
  if (!v.is_number_integer())
    throw ConfigError(std::string("problem.params.") + key, "expected an integer");
  return v.get<Index>();
}

template <class F>
ProblemPtr build(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem.params", e.what());
  }
}

ProblemPtr build_interpolation(Index d, Index n_atoms, double H, double B, std::uint64_t seed,
                               std::optional<ProblemConfig> cfg) {
  require(n_atoms >= 1, "n_atoms must be >= 1");
  require(d >= n_atoms, "d must be >= n_atoms");
  require(H > 0.0 && B > 0.0, "H and B must be positive");

  Matrix atoms = Matrix::Zero(d, n_atoms);
  for (Index j = 0; j < n_atoms; ++j) atoms(j, j) = std::sqrt(H);

  // Positive label profile on the atom span; the coordinate atoms make the
  // min-norm solve on the atom set a direct read-off.
  const CounterRng rng = construction_stream(seed);
  Vector wstar = Vector::Zero(d);
  for (Index j = 0; j < n_atoms; ++j)
    wstar(j) = 0.1 + 0.9 * rng.uniform(0, static_cast<std::uint64_t>(j), 0);
  wstar *= B / wstar.norm();

  Vector labels = atoms.transpose() * wstar;
  Vector probs = Vector::Constant(n_atoms, 1.0 / static_cast<double>(n_atoms));
  ProblemMeta meta = interpolating_meta(atoms, probs, wstar, H, B);
  if (!cfg) {
    cfg = ProblemConfig{"interpolation_least_squares",
                        json{{"d", d}, {"n_atoms", n_atoms}, {"H", H}, {"B", B}}, seed};
  }
  return std::make_shared<AtomLeastSquares>(std::move(*cfg), std::move(atoms), std::move(labels),
                                            std::move(probs), std::move(meta));
}

ProblemPtr build_sign_vector(Index n, double H, double B, const std::vector<int>& signs,
                             std::optional<ProblemConfig> cfg) {
  require(n >= 1, "n must be >= 1");
  require(static_cast<Index>(signs.size()) == 2 * n, "sign vector length must be 2n");
  require(H > 0.0 && B > 0.0, "H and B must be positive");
  require(std::all_of(signs.begin(), signs.end(), [](int s) { return s == 1 || s == -1; }),
          "signs must be +1 or -1");

  const Index d = 2 * n;
  const double scale = B / std::sqrt(static_cast<double>(d));
  Matrix atoms = std::sqrt(H) * Matrix::Identity(d, d);
  Vector wstar(d);
  for (Index j = 0; j < d; ++j) wstar(j) = scale * signs[static_cast<std::size_t>(j)];
  Vector labels = atoms.transpose() * wstar;
  Vector probs = Vector::Constant(d, 1.0 / static_cast<double>(d));

  ProblemMeta meta;
  meta.H = H;
  meta.B = B;
  meta.Lstar = 0.0;
  meta.sigma_star_sq = 0.0;
  meta.lambda = H / static_cast<double>(d);
  meta.Delta = H * B * B / (4.0 * static_cast<double>(n));
  meta.wstar = wstar;
  if (!cfg) cfg = ProblemConfig{"sign_vector", json{{"n", n}, {"H", H}, {"B", B}, {"signs", signs}}, 0};
  return std::make_shared<AtomLeastSquares>(std::move(*cfg), std::move(atoms), std::move(labels),
                                            std::move(probs), std::move(meta));
}

ProblemPtr build_spike(double H, double B, double p, double s, int sign, std::uint64_t seed,
                       std::optional<ProblemConfig> cfg) {
  require(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
  require(H >= 0.0 && B >= 0.0 && s >= 0.0, "H, B and s must be non-negative");
  require(sign == 1 || sign == -1, "sign must be +1 or -1");
  if (!cfg) {
    cfg = ProblemConfig{"gaussian_spike",
                        json{{"H", H}, {"B", B}, {"p", p}, {"s", s}, {"sign", sign}}, seed};
  }
  return std::make_shared<GaussianSpike>(std::move(*cfg), H, B, p, s, sign);
}

ProblemPtr build_growth(Index d, Index rank, double lambda, double H, double Delta,
                        std::uint64_t seed, std::optional<ProblemConfig> cfg) {
  require(rank >= 1, "rank must be >= 1");
  require(rank < d, "rank must be < d");
  require(lambda > 0.0, "lambda must be positive");
  require(lambda <= H, "lambda must be <= H");
  require(static_cast<double>(rank) * lambda <= H * (1.0 + 1e-12),
          "rank * lambda must be <= H for unit-norm atoms scaled by sqrt(H)");
  require(Delta > 0.0, "Delta must be positive");

  const CounterRng rng = construction_stream(seed);
  Matrix g(d, rank);
  for (Index i = 0; i < d; ++i)
    for (Index k = 0; k < rank; ++k)
      g(i, k) = rng.normal(1, static_cast<std::uint64_t>(i * rank + k), 0);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(d, rank);

  Vector mu(rank);
  const double top = H / static_cast<double>(rank);
  for (Index k = 0; k < rank; ++k) {
    mu(k) = rank == 1 ? lambda
                      : lambda * std::pow(top / lambda, static_cast<double>(k) /
                                                            static_cast<double>(rank - 1));
  }

  // Atoms sqrt(H) q_k with probability mu_k / H, plus a null atom.
  Matrix atoms = Matrix::Zero(d, rank + 1);
  atoms.leftCols(rank) = std::sqrt(H) * q;
  Vector probs(rank + 1);
  probs.head(rank) = mu / H;
  probs(rank) = std::max(0.0, 1.0 - probs.head(rank).sum());

  Vector a(rank);
  for (Index k = 0; k < rank; ++k) a(k) = rng.normal(2, static_cast<std::uint64_t>(k), 0);
  Vector wstar = q * a;
  const double energy = a.dot(mu.cwiseProduct(a));
  wstar *= std::sqrt(2.0 * Delta / energy);

  Vector labels = atoms.transpose() * wstar;
  ProblemMeta meta;
  meta.H = H;
  meta.B = wstar.norm();
  meta.Lstar = 0.0;
  meta.sigma_star_sq = 0.0;
  meta.lambda = lambda;
  meta.Delta = Delta;
  meta.wstar = wstar;
  if (!cfg) {
    cfg = ProblemConfig{
        "growth", json{{"d", d}, {"rank", rank}, {"lambda", lambda}, {"H", H}, {"Delta", Delta}},
        seed};
  }
  return std::make_shared<AtomLeastSquares>(std::move(*cfg), std::move(atoms), std::move(labels),
                                            std::move(probs), std::move(meta));
}

ProblemPtr build_quadratic(Index d, double H, double B, double condition,
                           std::optional<ProblemConfig> cfg) {
  require(d >= 1, "d must be >= 1");
  require(H > 0.0 && B > 0.0, "H and B must be positive");
  require(condition >= 1.0, "condition must be >= 1");
  Vector mu(d);
  for (Index i = 0; i < d; ++i) {
    const double frac = d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    mu(i) = H * std::pow(condition, -frac);
  }
  Vector wstar = Vector::Constant(d, B / std::sqrt(static_cast<double>(d)));
  if (!cfg) {
    cfg = ProblemConfig{"noiseless_quadratic",
                        json{{"d", d}, {"H", H}, {"B", B}, {"condition", condition}}, 0};
  }
  return std::make_shared<NoiselessQuadratic>(std::move(*cfg), std::move(mu), std::move(wstar), H);
}

}  // namespace

ProblemPtr make_interpolation_least_squares(Index d, Index n_atoms, double H, double B,
                                            std::uint64_t seed) {
  return build_interpolation(d, n_atoms, H, B, seed, std::nullopt);
}

ProblemPtr make_sign_vector_problem(Index n, double H, double B, const std::vector<int>& signs) {
  return build_sign_vector(n, H, B, signs, std::nullopt);
}

ProblemPtr make_gaussian_spike_problem(double H, double B, double p, double s, int sign,
                                       std::uint64_t seed) {
  return build_spike(H, B, p, s, sign, seed, std::nullopt);
}

ProblemPtr make_growth_problem(Index d, Index rank, double lambda, double H, double Delta,
                               std::uint64_t seed) {
  return build_growth(d, rank, lambda, H, Delta, seed, std::nullopt);
}

ProblemPtr make_noiseless_quadratic(Index d, double H, double B, double condition) {
  return build_quadratic(d, H, B, condition, std::nullopt);
}

ProblemPtr make_problem(const ProblemConfig& config) {
  const json& p = config.params;
  const std::string& f = config.family;
  if (f == "interpolation_least_squares") {
    check_keys(p, {"d", "n_atoms", "H", "B"});
    return build([&] {
      return build_interpolation(get_index(p, "d"), get_index(p, "n_atoms"), get_number(p, "H"),
                                 get_number(p, "B"), config.seed, config);
    });
  }
  if (f == "sign_vector") {
    check_keys(p, {"n", "H", "B", "signs"});
    if (!p.contains("signs") || !p.at("signs").is_array())
      throw ConfigError("problem.params.signs", "expected an array of +1/-1");
    std::vector<int> signs;
    for (const auto& s : p.at("signs")) {
      if (!s.is_number_integer()) throw ConfigError("problem.params.signs", "expected integers");
      signs.push_back(s.get<int>());
    }
    return build([&] {
      return build_sign_vector(get_index(p, "n"), get_number(p, "H"), get_number(p, "B"), signs,
                               config);
    });
  }
  if (f == "gaussian_spike") {
    check_keys(p, {"H", "B", "p", "s", "sign"});
    const double sign = get_number(p, "sign", 1.0);
    return build([&] {
      return build_spike(get_number(p, "H"), get_number(p, "B"), get_number(p, "p"),
                         get_number(p, "s"), static_cast<int>(sign), config.seed, config);
    });
  }
  if (f == "growth") {
    check_keys(p, {"d", "rank", "lambda", "H", "Delta"});
    return build([&] {
      return build_growth(get_index(p, "d"), get_index(p, "rank"), get_number(p, "lambda"),
                          get_number(p, "H"), get_number(p, "Delta"), config.seed, config);
    });
  }
  if (f == "noiseless_quadratic") {
    check_keys(p, {"d", "H", "B", "condition"});
    return build([&] {
      return build_quadratic(get_index(p, "d"), get_number(p, "H"), get_number(p, "B"),
                             get_number(p, "condition", 1e8), config);
    });
  }
  throw ConfigError("problem.family", "unknown family '" + f + "'");
}

const std::vector<std::string>& problem_families() {
  static const std::vector<std::string> names{"interpolation_least_squares", "sign_vector",
                                              "gaussian_spike", "growth", "noiseless_quadratic"};
  return names;
}

}  // namespace optaccel
