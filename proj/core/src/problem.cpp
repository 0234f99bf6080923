#include "optaccel/problem.hpp"

#include "optaccel/hashing.hpp"

#include <stdexcept>

namespace optaccel {

void to_json(nlohmann::json& j, const ProblemConfig& c) {
  j = nlohmann::json{{"family", c.family}, {"params", c.params}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ProblemConfig& c) {
  if (!j.is_object()) throw ConfigError("problem", "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "family" && key != "params" && key != "seed")
      throw ConfigError("problem." + key, "unknown key");
  }
  if (!j.contains("family") || !j.at("family").is_string())
    throw ConfigError("problem.family", "missing or not a string");
  c.family = j.at("family").get<std::string>();
  c.params = j.value("params", nlohmann::json::object());
  if (!c.params.is_object()) throw ConfigError("problem.params", "expected an object");
  c.seed = 0;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned())
      throw ConfigError("problem.seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
}

std::string config_hash(const ProblemConfig& c) {
  return sha256_hex(nlohmann::json(c).dump());
}

DataPoint Batch::at(Index i) const {
  return DataPoint{x.rows() > 0 ? Vector(x.col(i)) : Vector(), y(i)};
}

Problem::Problem(ProblemConfig config, Index dimension, ProblemMeta meta, QuadraticMoments moments)
    : config_(std::move(config)),
      dimension_(dimension),
      meta_(std::move(meta)),
      moments_(std::move(moments)) {}

void Problem::minibatch_gradient_into(Vector& g, const Vector& w, const Batch& batch) const {
  if (batch.size() == 0) throw std::invalid_argument("minibatch_gradient: empty batch");
  g.setZero(dimension_);
  for (Index i = 0; i < batch.size(); ++i) g += gradient(w, batch.at(i));
  g /= static_cast<double>(batch.size());
}

double Problem::excess_loss(const Vector& w) const {
  const Vector e = w - *meta_.wstar;
  return 0.5 * e.dot(moments_.second_moment * e);
}

Vector Problem::expected_gradient(const Vector& w) const {
  return moments_.second_moment * (w - *meta_.wstar);
}

double LeastSquaresProblem::loss(const Vector& w, const DataPoint& z) const {
  const double r = w.dot(z.x) - z.y;
  return 0.5 * r * r;
}

Vector LeastSquaresProblem::gradient(const Vector& w, const DataPoint& z) const {
  return (w.dot(z.x) - z.y) * z.x;
}

void LeastSquaresProblem::minibatch_gradient_into(Vector& g, const Vector& w,
                                                  const Batch& batch) const {
  const Index b = batch.size();
  if (b == 0) throw std::invalid_argument("minibatch_gradient: empty batch");
  g.setZero(dimension());
  for (Index i = 0; i < b; ++i) {
    const double r = batch.x.col(i).dot(w) - batch.y(i);
    g.noalias() += r * batch.x.col(i);
  }
  g /= static_cast<double>(b);
}

Batch sample_batch(const Problem& problem, Index b, RngState& state) {
  Batch out;
  sample_batch_into(problem, b, state, out);
  return out;
}

void sample_batch_into(const Problem& problem, Index b, RngState& state, Batch& out) {
  if (b < 1) throw std::invalid_argument("sample_batch: b must be >= 1");
  problem.sample_into(out, b, state.stream(), state.position);
  ++state.position;
}

Vector minibatch_gradient(const Problem& problem, const Vector& w, const Batch& batch) {
  Vector g;
  problem.minibatch_gradient_into(g, w, batch);
  return g;
}

}  // namespace optaccel
