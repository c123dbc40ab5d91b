#pragma once

#include <string>
#include <variant>
#include <vector>

#include "io.hpp"
#include "predictive/predictive.hpp"

namespace predictive::cli {

/// "uniformK" | "bernoulli:p" | "discrete:v=p,..." | "uniform:a:b" | "normal:mu:sd" | "tags"
inline BaseMeasure parse_base(const std::string& spec) {
  const std::string what = "base '" + spec + "'";
  const auto parts = split(spec, ':');
  const std::string head(parts.front());
  if (head.rfind("uniform", 0) == 0 && head.size() > 7 && parts.size() == 1) {
    const auto k = parse_int(std::string_view(head).substr(7), what);
    if (k < 1) throw ConfigError(what + ": need at least one label");
    return BaseMeasure::uniform_labels(k);
  }
  if (head == "bernoulli" && parts.size() == 2) {
    const double p = parse_double(parts[1], what);
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(what + ": p must lie in [0,1]");
    return BaseMeasure::discrete(DiscreteDistribution({Label{0}, Label{1}}, {1.0 - p, p}));
  }
  if (head == "discrete" && parts.size() == 2) {
    std::vector<Point> labels;
    std::vector<double> probs;
    for (auto item : split(parts[1], ',')) {
      const auto kv = split(item, '=');
      if (kv.size() != 2) throw ConfigError(what + ": expected value=probability pairs");
      labels.emplace_back(Label{parse_int(kv[0], what)});
      probs.push_back(parse_double(kv[1], what));
    }
    return BaseMeasure::discrete(DiscreteDistribution(std::move(labels), std::move(probs)));
  }
  if (head == "uniform" && parts.size() == 3) {
    const double a = parse_double(parts[1], what), b = parse_double(parts[2], what);
    return BaseMeasure::uniform(a, b);
  }
  if (head == "normal" && parts.size() == 3) {
    const double mu = parse_double(parts[1], what), sd = parse_double(parts[2], what);
    return BaseMeasure::normal(mu, sd);
  }
  if (head == "tags" && parts.size() == 1) return BaseMeasure::tags();
  throw ConfigError("unknown " + what);
}

/// "bernoulli" | "binomial:m" | "poisson" | "normal:sigma"
inline NewtonKernel parse_kernel(const std::string& spec) {
  const std::string what = "kernel '" + spec + "'";
  const auto parts = split(spec, ':');
  if (parts[0] == "bernoulli" && parts.size() == 1) return bernoulli_kernel();
  if (parts[0] == "binomial" && parts.size() == 2) return binomial_kernel(parse_int(parts[1], what));
  if (parts[0] == "poisson" && parts.size() == 1) return poisson_kernel();
  if (parts[0] == "normal" && parts.size() == 2) return normal_kernel(parse_double(parts[1], what));
  throw ConfigError("unknown " + what);
}

struct RuleOptions {
  std::string rule = "polya";
  double alpha = 1.0;
  std::string base = "uniform2";
  double discount = 0.0;  // Pitman-Yor
  double boost = 1.0;     // recency
  std::string kernel = "bernoulli";
  std::string theta_grid = "0.2,0.8";
  std::string g0;  // empty: uniform over theta_grid
  double newton_alpha = 1.0;
  std::int64_t states = 3;  // reinforced urn
  std::int64_t x0 = 0;
};

inline const char* kRuleNames = "polya|iid|recency|crp|pitman-yor|newton|reinforced";

using AnyRule = std::variant<PolyaRule, IidRule, RecencyRule, NewtonRule, SpeciesRule<CrpPolicy>,
                             SpeciesRule<PitmanYorPolicy>, ReinforcedUrnRule>;

inline MixingGrid make_grid(const RuleOptions& o) {
  auto theta = parse_list(o.theta_grid, "theta-grid");
  auto g0 = parse_list(o.g0, "g0");
  if (g0.empty()) g0.assign(theta.size(), theta.empty() ? 0.0 : 1.0 / static_cast<double>(theta.size()));
  return make_mixing_grid(std::move(theta), std::move(g0), parse_kernel(o.kernel), o.newton_alpha);
}

inline ReinforcedParams reinforced_params(const RuleOptions& o) {
  if (o.states < 1) throw ConfigError("reinforced: states must be >= 1");
  ReinforcedParams params;
  for (std::int64_t x = 0; x < o.states; ++x)
    params[Label{x}] = UrnParams{o.alpha, DiscreteDistribution::uniform(labels(o.states))};
  return params;
}

inline AnyRule make_rule(const RuleOptions& o) {
  if (o.rule == "polya") return PolyaRule(o.alpha, parse_base(o.base));
  if (o.rule == "iid") return IidRule(parse_base(o.base));
  if (o.rule == "recency") return RecencyRule(o.alpha, parse_base(o.base), o.boost);
  if (o.rule == "newton") return NewtonRule(make_grid(o));
  if (o.rule == "crp") return SpeciesRule<CrpPolicy>(CrpPolicy{o.alpha}, parse_base(o.base));
  if (o.rule == "pitman-yor") {
    check_pitman_yor(o.alpha, o.discount);
    return SpeciesRule<PitmanYorPolicy>(PitmanYorPolicy{o.alpha, o.discount}, parse_base(o.base));
  }
  if (o.rule == "reinforced") {
    if (o.x0 < 0 || o.x0 >= o.states) throw ConfigError("reinforced: x0 must be one of the states");
    return ReinforcedUrnRule(Label{o.x0}, reinforced_params(o));
  }
  throw ConfigError("unknown rule '" + o.rule + "' (expected " + kRuleNames + ")");
}

/// Kind of the observations a rule consumes (for reading data files).
inline PointKind observation_kind(const AnyRule& rule, const RuleOptions& o) {
  if (std::holds_alternative<NewtonRule>(rule))
    return std::get<NewtonRule>(rule).initial_state().kernel.name == "normal" ? PointKind::real
                                                                              : PointKind::categorical;
  if (std::holds_alternative<ReinforcedUrnRule>(rule)) return PointKind::categorical;
  return parse_base(o.base).kind();
}

inline Json rule_json(const RuleOptions& o) {
  Json j{{"rule", o.rule}};
  if (o.rule == "newton") {
    j["kernel"] = o.kernel;
    j["theta_grid"] = parse_list(o.theta_grid, "theta-grid");
    j["g0"] = make_grid(o).probs;
    j["newton_alpha"] = o.newton_alpha;
    return j;
  }
  j["alpha"] = o.alpha;
  if (o.rule == "reinforced") {
    j["states"] = o.states;
    j["x0"] = o.x0;
    return j;
  }
  j["base"] = parse_base(o.base).describe();
  if (o.rule == "pitman-yor") j["discount"] = o.discount;
  if (o.rule == "recency") j["boost"] = o.boost;
  return j;
}

/// "constant:p" | "product" | "min" | "max" | "threshold:c" | "skew"
inline Graphon parse_graphon(const std::string& spec) {
  const std::string what = "graphon '" + spec + "'";
  const auto parts = split(spec, ':');
  if (parts[0] == "constant" && parts.size() == 2) return Graphon::constant(parse_double(parts[1], what));
  if (parts[0] == "product" && parts.size() == 1) return Graphon([](double u, double v) { return u * v; }, true);
  if (parts[0] == "min" && parts.size() == 1) return Graphon([](double u, double v) { return std::min(u, v); }, true);
  if (parts[0] == "max" && parts.size() == 1) return Graphon([](double u, double v) { return std::max(u, v); }, true);
  if (parts[0] == "threshold" && parts.size() == 2) {
    const double c = parse_double(parts[1], what);
    return Graphon([c](double u, double v) { return u + v < c ? 1.0 : 0.0; }, true);
  }
  if (parts[0] == "skew" && parts.size() == 1)
    return Graphon([](double u, double v) { return u * (1.0 - v); }, false);
  throw ConfigError("unknown " + what);
}

/// "1,0;1,1" with optional probabilities "0.5,0.5" (uniform when empty).
inline CovariateLaw parse_covariates(const std::string& points, const std::string& probs) {
  std::vector<RealVector> xs;
  for (auto row : split(points, ';')) xs.push_back(parse_list(std::string(row), "covariates"));
  auto p = parse_list(probs, "covariate-probs");
  if (p.empty()) p.assign(xs.size(), 1.0 / static_cast<double>(xs.size()));
  return CovariateLaw::finite(std::move(xs), std::move(p));
}

}  // namespace predictive::cli
