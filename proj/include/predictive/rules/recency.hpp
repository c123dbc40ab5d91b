#pragma once

#include <string>

#include "predictive/engine.hpp"
#include "predictive/rules/polya.hpp"

namespace predictive {

/// Pólya rule with an extra weight `boost` on the most recent observation:
///   P_n({y}) = (alpha P_0({y}) + m_n(y) + boost 1{y = x_n}) / (alpha + n + boost).
/// Depends on the order of the data, so it is neither exchangeable nor c.i.d.;
/// kept as a reference counterexample for the diagnostics.
class RecencyRule : public MeasureRule<RecencyRule> {
 public:
  using state_type = PolyaState;
  using observation_type = Point;

  RecencyRule(double alpha, BaseMeasure base, double boost) : polya_(alpha, std::move(base)), boost_(boost) {
    if (!(boost_ >= 0.0)) throw ConfigError("recency: boost must be >= 0");
  }

  PolyaState initial_state() const { return polya_.initial_state(); }
  PolyaState update(PolyaState s, const Point& x) const { return polya_.update(std::move(s), x); }

  AtomicMixture predict(const PolyaState& s) const {
    if (s.n == 0) return AtomicMixture::from_base(polya_.base());
    const double n = static_cast<double>(s.n);
    const double denom = polya_.alpha() + n + boost_;
    std::vector<AtomicMixture::Atom> atoms;
    atoms.reserve(s.draws.size() + 1);
    for (const auto& x : s.draws) atoms.emplace_back(x, 1.0 / denom);
    atoms.emplace_back(s.draws.back(), boost_ / denom);
    return AtomicMixture(std::move(atoms), polya_.alpha() / denom, polya_.base());
  }

  const SampleSpace& space() const { return polya_.space(); }
  std::string name() const { return "recency"; }

 private:
  PolyaRule polya_;
  double boost_;
};

}  // namespace predictive
