#pragma once

#include <string>

#include "predictive/engine.hpp"
#include "predictive/measure.hpp"

namespace predictive {

/// Sample space spanned by a measure's atoms and base.
inline SampleSpace space_of(const AtomicMixture& m) {
  SampleSpace sp;
  sp.kind = m.kind();
  if (m.base()) {
    sp.dimension = m.base().dimension();
  } else if (auto* v = std::get_if<RealVector>(&m.atoms().front().first)) {
    sp.dimension = v->size();
  }
  std::optional<std::vector<Point>> base_support;
  if (m.base()) base_support = m.base().support();
  if (m.diffuse_weight() == 0.0 || base_support) {
    std::vector<Point> s = base_support.value_or(std::vector<Point>{});
    for (const auto& [x, w] : m.atoms())
      if (std::find(s.begin(), s.end(), x) == s.end()) s.push_back(x);
    sp.support = std::move(s);
  }
  return sp;
}

/// P_n = P_0 for every n: the rule that never learns.
class IidRule : public MeasureRule<IidRule> {
 public:
  struct State {
    std::size_t n = 0;
  };
  using state_type = State;
  using observation_type = Point;

  explicit IidRule(AtomicMixture p0) : p0_(std::move(p0)), space_(space_of(p0_)) {}
  explicit IidRule(BaseMeasure base) : IidRule(AtomicMixture::from_base(std::move(base))) {}

  State initial_state() const { return {}; }
  State update(State s, const Point&) const {
    ++s.n;
    return s;
  }
  const AtomicMixture& predict(const State&) const { return p0_; }
  const SampleSpace& space() const { return space_; }
  std::string name() const { return "iid"; }

 private:
  AtomicMixture p0_;
  SampleSpace space_;
};

}  // namespace predictive
