#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "predictive/engine.hpp"
#include "predictive/measure.hpp"

namespace predictive {

/// Summary of a Pólya (Dirichlet) sequence: concentration, base measure and
/// the multiset of observations (kept in arrival order for O(1) resampling).
struct PolyaState {
  double alpha = 1.0;
  BaseMeasure base;
  std::size_t n = 0;
  std::vector<Point> draws;

  std::size_t multiplicity(const Point& x) const {
    return static_cast<std::size_t>(std::count(draws.begin(), draws.end(), x));
  }
};

/// P_n = alpha/(alpha+n) P_0 + sum_x m(x)/(alpha+n) delta_x.
inline AtomicMixture polya_predict(const PolyaState& s) {
  if (!(s.alpha > 0.0)) throw ConfigError("polya: alpha must be > 0");
  if (s.n != s.draws.size()) throw ConfigError("polya: step count differs from sample size");
  if (s.n == 0) return AtomicMixture::from_base(s.base);
  std::map<Point, std::size_t> counts;
  for (const auto& x : s.draws) ++counts[x];
  const double denom = s.alpha + static_cast<double>(s.n);
  std::vector<AtomicMixture::Atom> atoms;
  atoms.reserve(counts.size());
  for (const auto& [x, c] : counts) atoms.emplace_back(x, static_cast<double>(c) / denom);
  return AtomicMixture(std::move(atoms), s.alpha / denom, s.base);
}

/// Grid values of a Pólya predictive, updated in O(grid) per observation.
class PolyaCdfTracker {
 public:
  PolyaCdfTracker(const PolyaState& s, std::span<const double> grid)
      : alpha_(s.alpha), grid_(grid.begin(), grid.end()), base_cdf_(grid.size()),
        below_(grid.size(), 0), values_(grid.size()), n_(s.n) {
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      base_cdf_[j] = s.base.cdf(grid_[j]);
      for (const auto& x : s.draws)
        if (scalar_value(x) <= grid_[j]) ++below_[j];
    }
    refresh();
  }

  void observe(const PolyaState& after, const Point& x) {
    const double v = scalar_value(x);
    for (std::size_t j = 0; j < grid_.size(); ++j)
      if (v <= grid_[j]) ++below_[j];
    n_ = after.n;
    refresh();
  }

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  void refresh() {
    const double denom = alpha_ + static_cast<double>(n_);
    for (std::size_t j = 0; j < grid_.size(); ++j)
      values_[j] = (alpha_ * base_cdf_[j] + static_cast<double>(below_[j])) / denom;
  }

  double alpha_;
  std::vector<double> grid_;
  std::vector<double> base_cdf_;
  std::vector<std::size_t> below_;
  std::vector<double> values_;
  std::size_t n_;
};

/// Pólya sequence / Blackwell-MacQueen urn with concentration alpha and base P_0.
class PolyaRule : public MeasureRule<PolyaRule> {
 public:
  using state_type = PolyaState;
  using observation_type = Point;

  PolyaRule(double alpha, BaseMeasure base) : alpha_(alpha), base_(std::move(base)) {
    if (!(alpha_ > 0.0)) throw ConfigError("polya: alpha must be > 0");
    if (!base_) throw ConfigError("polya: base measure required");
    space_ = base_.space();
  }

  PolyaState initial_state() const { return PolyaState{alpha_, base_, 0, {}}; }

  PolyaState update(PolyaState s, const Point& x) const {
    s.draws.push_back(x);
    ++s.n;
    return s;
  }

  AtomicMixture predict(const PolyaState& s) const { return polya_predict(s); }

  /// O(1): a past draw chosen uniformly with probability n/(alpha+n), else P_0.
  Point draw(const PolyaState& s, RandomSource& rng) const {
    const double n = static_cast<double>(s.n);
    if (rng.uniform() * (alpha_ + n) < alpha_) return base_.sample(rng);
    return s.draws[rng.index(s.n)];
  }

  double mass(const PolyaState& s, const Point& x) const {
    return (alpha_ * base_.mass(x) + static_cast<double>(s.multiplicity(x))) /
           (alpha_ + static_cast<double>(s.n));
  }

  double cdf(const PolyaState& s, double t) const {
    std::size_t below = 0;
    for (const auto& x : s.draws)
      if (scalar_value(x) <= t) ++below;
    return (alpha_ * base_.cdf(t) + static_cast<double>(below)) / (alpha_ + static_cast<double>(s.n));
  }

  PolyaCdfTracker cdf_tracker(const PolyaState& s, std::span<const double> grid) const {
    return PolyaCdfTracker(s, grid);
  }

  const SampleSpace& space() const { return space_; }
  double alpha() const noexcept { return alpha_; }
  const BaseMeasure& base() const noexcept { return base_; }
  std::string name() const { return "polya"; }

 private:
  double alpha_;
  BaseMeasure base_;
  SampleSpace space_;
};

}  // namespace predictive
