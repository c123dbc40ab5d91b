#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "predictive/structured/oracle.hpp"

namespace predictive {

/// Infinite HMM latent chain: a Hoppe urn per discovered state (alpha black
/// balls plus the successors drawn so far), fed by a common oracle urn.
struct IhmmState {
  double alpha = 1.0;
  OracleUrn oracle;
  std::map<Point, std::vector<Point>> urns;
  std::optional<Point> current;
  std::size_t n = 0;
};

struct IhmmDraw {
  IhmmState state;
  Point next;
  bool from_oracle = false;
};

inline IhmmState make_ihmm(double alpha, double gamma, BaseMeasure base) {
  if (!(alpha > 0.0)) throw ConfigError("ihmm: alpha must be > 0");
  return IhmmState{alpha, make_oracle(gamma, std::move(base)), {}, std::nullopt, 0};
}

/// Draws X_0 from the oracle on the first call, then X_{n+1} from the urn of X_n.
inline IhmmDraw ihmm_next(IhmmState s, RandomSource& rng) {
  IhmmDraw out;
  if (!s.current) {
    out.next = oracle_draw(s.oracle, rng);
    out.from_oracle = true;
  } else {
    auto& urn = s.urns[*s.current];
    const double n = static_cast<double>(urn.size());
    if (rng.uniform() * (s.alpha + n) < s.alpha) {
      out.next = oracle_draw(s.oracle, rng);
      out.from_oracle = true;
    } else {
      out.next = urn[rng.index(urn.size())];
    }
    urn.push_back(out.next);
  }
  s.urns.try_emplace(out.next);
  s.current = out.next;
  ++s.n;
  out.state = std::move(s);
  return out;
}

/// Law of the next state given the past, integrating over the next oracle draw:
///   (t_{x,y} + alpha m_y/(gamma+m)) / (alpha + n_x) on seen states,
///   alpha gamma / ((gamma+m)(alpha+n_x)) on a fresh P_0 draw.
inline AtomicMixture ihmm_predict(const IhmmState& s) {
  const AtomicMixture oracle = oracle_predict(s.oracle);
  if (!s.current) return oracle;
  const auto& urn = s.urns.at(*s.current);
  const double denom = s.alpha + static_cast<double>(urn.size());
  std::vector<AtomicMixture::Atom> atoms;
  for (const auto& y : urn) atoms.emplace_back(y, 1.0 / denom);
  for (const auto& [y, w] : oracle.atoms()) atoms.emplace_back(y, s.alpha * w / denom);
  return AtomicMixture(std::move(atoms), s.alpha * oracle.diffuse_weight() / denom, oracle.base());
}

}  // namespace predictive
