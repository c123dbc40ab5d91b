#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "predictive/error.hpp"
#include "predictive/measure.hpp"

namespace predictive {

/// Hoppe urn with gamma black balls and colour law P_0; its draws form a
/// Pólya sequence. gamma = +inf gives a fresh colour every time.
struct OracleUrn {
  double gamma = 1.0;
  BaseMeasure base;
  std::vector<Point> draws;
};

inline OracleUrn make_oracle(double gamma, BaseMeasure base) {
  if (!(gamma > 0.0)) throw ConfigError("oracle urn: gamma must be > 0");
  if (!base) throw ConfigError("oracle urn: base measure required");
  return OracleUrn{gamma, std::move(base), {}};
}

/// Probability that the next oracle draw is a fresh colour from P_0.
inline double oracle_fresh_probability(const OracleUrn& o) {
  if (std::isinf(o.gamma)) return 1.0;
  return o.gamma / (o.gamma + static_cast<double>(o.draws.size()));
}

/// Draws a colour and returns both balls to the urn.
inline Point oracle_draw(OracleUrn& o, RandomSource& rng) {
  Point c = rng.uniform() < oracle_fresh_probability(o) ? o.base.sample(rng) : o.draws[rng.index(o.draws.size())];
  o.draws.push_back(c);
  return c;
}

/// Predictive of the next oracle draw: (gamma P_0 + sum_i delta_{theta_i}) / (gamma + m).
inline AtomicMixture oracle_predict(const OracleUrn& o) {
  if (o.draws.empty() || std::isinf(o.gamma)) return AtomicMixture::from_base(o.base);
  const double denom = o.gamma + static_cast<double>(o.draws.size());
  std::vector<AtomicMixture::Atom> atoms;
  atoms.reserve(o.draws.size());
  for (const auto& d : o.draws) atoms.emplace_back(d, 1.0 / denom);
  return AtomicMixture(std::move(atoms), o.gamma / denom, o.base);
}

}  // namespace predictive
