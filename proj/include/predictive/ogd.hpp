#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "predictive/asymptotics.hpp"
#include "predictive/engine.hpp"

namespace predictive {

/// One (covariates, binary response) pair.
struct LabeledExample {
  RealVector x;
  int y = 0;

  auto operator<=>(const LabeledExample&) const = default;
};

inline std::string describe(const LabeledExample& e) {
  std::string s = "(";
  for (std::size_t i = 0; i < e.x.size(); ++i) s += (i ? "," : "") + describe(Point{e.x[i]});
  return s + ";" + std::to_string(e.y) + ")";
}

enum class OgdLoss { cross_entropy, quadratic };

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                              std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// e^z / (1 + e^z) with z = x'beta, without overflow.
inline double logistic(std::span<const double> x, std::span<const double> beta) {
  const double z = dot(x, beta);
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// beta_n, the step count and the accumulator of n^2 (beta_n - beta_{n-1})(...)^T.
struct OgdState {
  std::vector<double> beta;
  std::size_t n = 0;
  UpdateAccumulator acc;
  double loss_scale = std::numbers::ln2;  // log 2 for a loss in bits, 1 for nats
  OgdLoss loss = OgdLoss::cross_entropy;
};

inline OgdState make_ogd_state(std::vector<double> beta0, double loss_scale = std::numbers::ln2,
                               OgdLoss loss = OgdLoss::cross_entropy) {
  if (beta0.empty()) throw ConfigError("ogd: beta must have dimension >= 1");
  if (!(loss_scale > 0.0)) throw ConfigError("ogd: loss scale must be > 0");
  for (double b : beta0)
    if (!std::isfinite(b)) throw ConfigError("ogd: beta_0 must be finite");
  OgdState s;
  s.acc = make_accumulator(beta0);
  s.beta = std::move(beta0);
  s.loss_scale = loss_scale;
  s.loss = loss;
  return s;
}

/// Gaussian beta_0 with independent N(0, sd^2) coordinates.
inline std::vector<double> gaussian_beta0(std::size_t d, double sd, RandomSource& rng) {
  std::vector<double> b(d);
  for (auto& v : b) v = rng.normal(0.0, sd);
  return b;
}

/// beta_n = beta_{n-1} + (1 / (n L)) (y - g(x, beta_{n-1})) x for cross entropy,
/// with the residual multiplied by g (1 - g) for the quadratic loss.
inline OgdState ogd_update(OgdState s, std::span<const double> x, int y) {
  if (y != 0 && y != 1) throw ConfigError("ogd: response must be 0 or 1");
  if (x.size() != s.beta.size())
    throw ConfigError("ogd: covariate dimension " + std::to_string(x.size()) + " differs from beta dimension " +
                      std::to_string(s.beta.size()));
  const double g = logistic(x, s.beta);
  double r = static_cast<double>(y) - g;
  if (s.loss == OgdLoss::quadratic) r *= g * (1.0 - g);
  ++s.n;
  const double step = r / (static_cast<double>(s.n) * s.loss_scale);
  for (std::size_t i = 0; i < x.size(); ++i) s.beta[i] += step * x[i];
  s.acc = record_update(std::move(s.acc), s.beta);
  return s;
}

inline OgdState ogd_update(OgdState s, const LabeledExample& e) { return ogd_update(std::move(s), e.x, e.y); }

/// Covariate law P_X: a finite support with probabilities, or a sampler.
class CovariateLaw {
 public:
  using Sampler = std::function<RealVector(RandomSource&)>;

  static CovariateLaw finite(std::vector<RealVector> points, std::vector<double> probs) {
    if (points.empty() || points.size() != probs.size())
      throw ConfigError("covariate law: points and probabilities must be non-empty and of equal length");
    detail::check_probability_vector(probs, 0.0, "covariate law");
    const std::size_t d = points.front().size();
    for (const auto& p : points)
      if (p.size() != d || d == 0) throw ConfigError("covariate law: points must share a dimension >= 1");
    CovariateLaw law;
    law.points_ = std::move(points);
    law.probs_ = std::move(probs);
    law.dim_ = d;
    return law;
  }

  static CovariateLaw sampled(Sampler sampler, std::size_t dim) {
    if (!sampler || dim == 0) throw ConfigError("covariate law: sampler and dimension required");
    CovariateLaw law;
    law.sampler_ = std::move(sampler);
    law.dim_ = dim;
    return law;
  }

  RealVector sample(RandomSource& rng) const {
    if (sampler_) {
      RealVector x = sampler_(rng);
      if (x.size() != dim_) throw ConfigError("covariate law: sampler returned a vector of wrong dimension");
      return x;
    }
    return points_[rng.categorical(probs_)];
  }

  bool is_finite() const noexcept { return !sampler_; }
  const std::vector<RealVector>& points() const noexcept { return points_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t dim() const noexcept { return dim_; }

  double mass(const RealVector& x) const {
    double m = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (points_[i] == x) m += probs_[i];
    return m;
  }

 private:
  std::vector<RealVector> points_;
  std::vector<double> probs_;
  Sampler sampler_;
  std::size_t dim_ = 0;
};

/// Joint predictive g^y (1 - g)^{1-y} P_X(dx) with the OGD recursion as update.
class OgdRule {
 public:
  using state_type = OgdState;
  using observation_type = LabeledExample;

  OgdRule(std::vector<double> beta0, CovariateLaw law, double loss_scale = std::numbers::ln2,
          OgdLoss loss = OgdLoss::cross_entropy)
      : initial_(make_ogd_state(std::move(beta0), loss_scale, loss)), law_(std::move(law)) {
    if (law_.dim() != initial_.beta.size()) throw ConfigError("ogd: covariate law dimension differs from beta");
  }

  OgdState initial_state() const { return initial_; }
  OgdState update(OgdState s, const LabeledExample& e) const { return ogd_update(std::move(s), e); }

  LabeledExample draw(const OgdState& s, RandomSource& rng) const {
    LabeledExample e{law_.sample(rng), 0};
    e.y = rng.bernoulli(logistic(e.x, s.beta)) ? 1 : 0;
    return e;
  }

  bool accepts(const LabeledExample& e) const {
    return e.x.size() == initial_.beta.size() && (e.y == 0 || e.y == 1);
  }

  /// P_X({x}) g^y (1 - g)^{1-y}; meaningful for finite covariate laws.
  double mass(const OgdState& s, const LabeledExample& e) const {
    const double g = logistic(e.x, s.beta);
    return law_.mass(e.x) * (e.y == 1 ? g : 1.0 - g);
  }

  std::optional<std::vector<LabeledExample>> support() const {
    if (!law_.is_finite()) return std::nullopt;
    std::vector<LabeledExample> out;
    for (const auto& x : law_.points())
      for (int y : {0, 1}) out.push_back(LabeledExample{x, y});
    return out;
  }

  const CovariateLaw& law() const noexcept { return law_; }
  std::string name() const { return "ogd"; }

 private:
  OgdState initial_;
  CovariateLaw law_;
};

inline Eigen::MatrixXd ogd_vn(const OgdState& s) { return vn(s.acc); }

struct OgdCredible {
  std::vector<Interval> intervals;
  GaussianApprox approx;
  Eigen::MatrixXd whitening;
};

/// beta_n[i] +- z sqrt(V_n[i,i] / n) and the whitening matrix (V_n / n)^{-1/2}.
inline OgdCredible ogd_credible(const OgdState& s, double level) {
  OgdCredible out;
  for (std::size_t i = 0; i < s.beta.size(); ++i)
    out.intervals.push_back(credible_interval(s.acc, s.beta[i], i, level, false));
  out.approx = gaussian_posterior(s.acc, s.beta);
  out.whitening = out.approx.whitening();
  return out;
}

/// U = L^{-2} sum_x x x^T g (1 - g) P_X({x}) at the given beta (exact, finite support).
inline Eigen::MatrixXd ogd_u_plugin(std::span<const double> beta, const CovariateLaw& law,
                                    double loss_scale = std::numbers::ln2) {
  if (!law.is_finite()) throw UnsupportedOperation("exact plug-in U needs a finite covariate law");
  const auto d = static_cast<Eigen::Index>(beta.size());
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t k = 0; k < law.points().size(); ++k) {
    const auto& x = law.points()[k];
    const double g = logistic(x, beta);
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), d);
    u += law.probs()[k] * g * (1.0 - g) * v * v.transpose();
  }
  return u / (loss_scale * loss_scale);
}

struct MonteCarloMatrix {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd standard_error;
};

/// Monte Carlo version of ogd_u_plugin from `draws` samples of P_X.
inline MonteCarloMatrix ogd_u_plugin_mc(std::span<const double> beta, const CovariateLaw& law, std::size_t draws,
                                        RandomSource& rng, double loss_scale = std::numbers::ln2) {
  if (draws < 2) throw DomainError("Monte Carlo plug-in needs at least two draws");
  const auto d = static_cast<Eigen::Index>(beta.size());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d), sq = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < draws; ++i) {
    const RealVector x = law.sample(rng);
    const double g = logistic(x, beta);
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), d);
    const Eigen::MatrixXd term = g * (1.0 - g) * v * v.transpose() / (loss_scale * loss_scale);
    sum += term;
    sq += term.cwiseProduct(term);
  }
  const double m = static_cast<double>(draws);
  MonteCarloMatrix out;
  out.mean = sum / m;
  const Eigen::MatrixXd var = ((sq / m) - out.mean.cwiseProduct(out.mean)) * (m / (m - 1.0));
  out.standard_error = (var.cwiseMax(0.0) / m).cwiseSqrt();
  return out;
}

}  // namespace predictive
