#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "predictive/engine.hpp"
#include "predictive/special.hpp"

namespace predictive {

/// Observation kernel k(x | theta).
struct NewtonKernel {
  std::string name;
  double parameter = 0.0;  // trials for binomial, sigma for normal
  std::function<double(const Point&, double)> log_density;
  std::function<Point(double, RandomSource&)> sample;
  std::function<double(double, double)> cdf;  // (t, theta)
  std::function<bool(double)> valid_theta;
  std::function<bool(const Point&)> accepts;
  std::optional<std::vector<Point>> support;

  std::string describe() const {
    return parameter == 0.0 ? name : name + ":" + predictive::describe(Point{parameter});
  }
};

namespace detail {

inline double log_choose(double m, double x) {
  return std::lgamma(m + 1.0) - std::lgamma(x + 1.0) - std::lgamma(m - x + 1.0);
}

/// x log(p) with the 0 log 0 = 0 convention.
inline double xlogy(double x, double p) { return x == 0.0 ? 0.0 : x * std::log(p); }

inline bool is_label_in(const Point& x, std::int64_t lo, std::int64_t hi) {
  const auto* l = std::get_if<Label>(&x);
  return l && l->value >= lo && l->value <= hi;
}

}  // namespace detail

/// Binomial(m, theta) on labels {0..m}; m = 1 is the Bernoulli kernel.
inline NewtonKernel binomial_kernel(std::int64_t trials) {
  if (trials < 1) throw ConfigError("binomial kernel: trials must be >= 1");
  const double m = static_cast<double>(trials);
  NewtonKernel k;
  k.name = trials == 1 ? "bernoulli" : "binomial";
  k.parameter = trials == 1 ? 0.0 : m;
  k.valid_theta = [](double t) { return t >= 0.0 && t <= 1.0; };
  k.accepts = [trials](const Point& x) { return detail::is_label_in(x, 0, trials); };
  k.log_density = [m, trials](const Point& x, double theta) {
    if (!detail::is_label_in(x, 0, trials)) return -std::numeric_limits<double>::infinity();
    const double v = static_cast<double>(std::get<Label>(x).value);
    return detail::log_choose(m, v) + detail::xlogy(v, theta) + detail::xlogy(m - v, 1.0 - theta);
  };
  k.sample = [trials](double theta, RandomSource& rng) {
    std::int64_t s = 0;
    for (std::int64_t i = 0; i < trials; ++i) s += rng.bernoulli(theta) ? 1 : 0;
    return Point{Label{s}};
  };
  k.cdf = [log_density = k.log_density, trials](double t, double theta) {
    double c = 0.0;
    for (std::int64_t v = 0; v <= trials && static_cast<double>(v) <= t; ++v)
      c += std::exp(log_density(Point{Label{v}}, theta));
    return std::min(c, 1.0);
  };
  std::vector<Point> support;
  for (std::int64_t v = 0; v <= trials; ++v) support.emplace_back(Label{v});
  k.support = std::move(support);
  return k;
}

inline NewtonKernel bernoulli_kernel() { return binomial_kernel(1); }

/// Poisson(theta) on labels {0, 1, ...}.
inline NewtonKernel poisson_kernel() {
  NewtonKernel k;
  k.name = "poisson";
  k.valid_theta = [](double t) { return t >= 0.0 && std::isfinite(t); };
  k.accepts = [](const Point& x) {
    return detail::is_label_in(x, 0, std::numeric_limits<std::int64_t>::max());
  };
  k.log_density = [](const Point& x, double theta) {
    if (!detail::is_label_in(x, 0, std::numeric_limits<std::int64_t>::max()))
      return -std::numeric_limits<double>::infinity();
    const double v = static_cast<double>(std::get<Label>(x).value);
    if (theta == 0.0) return v == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return v * std::log(theta) - theta - std::lgamma(v + 1.0);
  };
  k.sample = [](double theta, RandomSource& rng) {
    return Point{Label{static_cast<std::int64_t>(rng.poisson(theta))}};
  };
  k.cdf = [log_density = k.log_density](double t, double theta) {
    double c = 0.0;
    for (std::int64_t v = 0; static_cast<double>(v) <= t; ++v) {
      c += std::exp(log_density(Point{Label{v}}, theta));
      if (c >= 1.0) break;
    }
    return std::min(c, 1.0);
  };
  return k;
}

/// Normal(theta, sigma^2) on the real line.
inline NewtonKernel normal_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("normal kernel: sigma must be > 0");
  NewtonKernel k;
  k.name = "normal";
  k.parameter = sigma;
  k.valid_theta = [](double t) { return std::isfinite(t); };
  k.accepts = [](const Point& x) { return std::holds_alternative<double>(x) && std::isfinite(std::get<double>(x)); };
  k.log_density = [sigma](const Point& x, double theta) {
    const auto* v = std::get_if<double>(&x);
    if (!v) return -std::numeric_limits<double>::infinity();
    const double z = (*v - theta) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
  };
  k.sample = [sigma](double theta, RandomSource& rng) { return Point{rng.normal(theta, sigma)}; };
  k.cdf = [sigma](double t, double theta) { return normal_cdf((t - theta) / sigma); };
  return k;
}

/// Mixing distribution G_n on a fixed grid of theta values.
struct MixingGrid {
  std::vector<double> theta;
  std::vector<double> probs;
  NewtonKernel kernel;
  double alpha = 1.0;
  std::optional<double> forced_weight;  // overrides alpha_n when set
  std::size_t n = 0;

  /// alpha_n used by the update producing G_n.
  double weight(std::size_t step) const {
    return forced_weight ? *forced_weight : 1.0 / (alpha + static_cast<double>(step));
  }
};

inline MixingGrid make_mixing_grid(std::vector<double> theta, std::vector<double> probs, NewtonKernel kernel,
                                   double alpha = 1.0, std::optional<double> forced_weight = std::nullopt) {
  if (theta.empty() || theta.size() != probs.size())
    throw ConfigError("mixing grid: theta points and probabilities must be non-empty and of equal length");
  if (!kernel.log_density) throw ConfigError("mixing grid: kernel required");
  for (double t : theta)
    if (!kernel.valid_theta(t))
      throw ConfigError("mixing grid: theta " + describe(Point{t}) + " outside the " + kernel.name + " kernel domain");
  detail::check_probability_vector(probs, 0.0, "mixing grid");
  if (!(alpha > 0.0)) throw ConfigError("mixing grid: alpha must be > 0");
  if (forced_weight && !(*forced_weight >= 0.0 && *forced_weight <= 1.0))
    throw ConfigError("mixing grid: forced weight must lie in [0,1]");
  return MixingGrid{std::move(theta), std::move(probs), std::move(kernel), alpha, forced_weight, 0};
}

/// G_n = (1 - alpha_n) G_{n-1} + alpha_n G_{n-1}(. | x), the one-step posterior
/// computed in log space.
inline MixingGrid newton_update(MixingGrid g, const Point& x) {
  const std::size_t k = g.theta.size();
  std::vector<double> lw(k);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    lw[i] = g.probs[i] > 0.0 ? g.kernel.log_density(x, g.theta[i]) + std::log(g.probs[i])
                             : -std::numeric_limits<double>::infinity();
    top = std::max(top, lw[i]);
  }
  if (!std::isfinite(top))
    throw ConditioningOnNull("newton: predictive density is zero at x = " + describe(x));
  double z = 0.0;
  for (auto& w : lw) z += (w = std::exp(w - top));
  const double a = g.weight(g.n + 1);
  ++g.n;
  if (a == 0.0) return g;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += (g.probs[i] = (1.0 - a) * g.probs[i] + a * lw[i] / z);
  for (auto& p : g.probs) p /= total;
  return g;
}

/// f_G(x) = sum_i k(x | theta_i) G(theta_i).
inline double newton_density(const MixingGrid& g, const Point& x) {
  double f = 0.0;
  for (std::size_t i = 0; i < g.theta.size(); ++i)
    if (g.probs[i] > 0.0) f += std::exp(g.kernel.log_density(x, g.theta[i])) * g.probs[i];
  return f;
}

inline double newton_cdf(const MixingGrid& g, double t) {
  double c = 0.0;
  for (std::size_t i = 0; i < g.theta.size(); ++i)
    if (g.probs[i] > 0.0) c += g.kernel.cdf(t, g.theta[i]) * g.probs[i];
  return c;
}

/// theta ~ G, then x ~ k(. | theta).
inline Point newton_sample(const MixingGrid& g, RandomSource& rng) {
  const double theta = g.theta[rng.categorical(g.probs)];
  return g.kernel.sample(theta, rng);
}

/// The predictive rule with summary T_n = G_n.
class NewtonRule {
 public:
  using state_type = MixingGrid;
  using observation_type = Point;

  explicit NewtonRule(MixingGrid g0) : g0_(std::move(g0)) {
    g0_ = make_mixing_grid(g0_.theta, g0_.probs, g0_.kernel, g0_.alpha, g0_.forced_weight);
  }

  MixingGrid initial_state() const { return g0_; }
  MixingGrid update(MixingGrid s, const Point& x) const { return newton_update(std::move(s), x); }
  Point draw(const MixingGrid& s, RandomSource& rng) const { return newton_sample(s, rng); }
  /// Point mass for discrete kernels, density value for the normal kernel.
  double mass(const MixingGrid& s, const Point& x) const { return newton_density(s, x); }
  double cdf(const MixingGrid& s, double t) const { return newton_cdf(s, t); }
  bool accepts(const Point& x) const { return g0_.kernel.accepts(x); }
  std::optional<std::vector<Point>> support() const { return g0_.kernel.support; }
  std::string name() const { return "newton"; }

 private:
  MixingGrid g0_;
};

}  // namespace predictive
