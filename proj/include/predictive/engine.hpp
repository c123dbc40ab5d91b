#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "predictive/error.hpp"
#include "predictive/measure.hpp"
#include "predictive/random.hpp"

namespace predictive {

/// A predictive rule: an initial summary T_0, a pure update T_n = h(T_{n-1}, x_n)
/// and a way to draw X_{n+1} from the current one-step-ahead predictive.
///
/// States are values carrying a step counter `n`; `update` consumes its state
/// argument so callers that move pay no copy, while callers that keep the old
/// state still see it unchanged.
template <class R>
concept PredictiveRule =
    std::copy_constructible<R> && std::copy_constructible<typename R::state_type> &&
    requires(const R& rule, const typename R::state_type& s, typename R::state_type owned,
             const typename R::observation_type& x, RandomSource& rng) {
      { rule.initial_state() } -> std::convertible_to<typename R::state_type>;
      { rule.update(std::move(owned), x) } -> std::convertible_to<typename R::state_type>;
      { rule.draw(s, rng) } -> std::convertible_to<typename R::observation_type>;
      { rule.accepts(x) } -> std::convertible_to<bool>;
      { rule.name() } -> std::convertible_to<std::string>;
      { s.n } -> std::convertible_to<std::size_t>;
    };

/// Rules whose one-step predictive assigns point masses; `support()` is engaged
/// when the sample space is finite.
template <class R>
concept MassRule = PredictiveRule<R> &&
    requires(const R& rule, const typename R::state_type& s, const typename R::observation_type& x) {
      { rule.mass(s, x) } -> std::convertible_to<double>;
      { rule.support() } -> std::convertible_to<std::optional<std::vector<typename R::observation_type>>>;
    };

/// Rules on the real line (or ordered labels) exposing P_n(t).
template <class R>
concept ScalarRule = PredictiveRule<R> &&
    requires(const R& rule, const typename R::state_type& s, double t) {
      { rule.cdf(s, t) } -> std::convertible_to<double>;
    };

template <class R>
using state_t = typename R::state_type;
template <class R>
using observation_t = typename R::observation_type;

/// Common plumbing for rules whose predictive is an explicit AtomicMixture.
/// Derived supplies predict(state) and space().
template <class Derived>
class MeasureRule {
 public:
  template <class State>
  Point draw(const State& s, RandomSource& rng) const {
    return predictive::sample(self().predict(s), rng);
  }
  template <class State>
  double mass(const State& s, const Point& x) const {
    return self().predict(s).mass(x);
  }
  template <class State>
  double cdf(const State& s, double t) const {
    return eval_cdf(self().predict(s), t);
  }
  bool accepts(const Point& x) const { return self().space().contains(x); }
  std::optional<std::vector<Point>> support() const { return self().space().support; }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

/// P_n on a fixed grid, refreshed after every observation by re-evaluating cdf.
template <ScalarRule R>
class GenericCdfTracker {
 public:
  GenericCdfTracker(const R& rule, const state_t<R>& s, std::span<const double> grid)
      : rule_(&rule), grid_(grid.begin(), grid.end()), values_(grid.size()) {
    refresh(s);
  }
  void observe(const state_t<R>& after, const observation_t<R>&) { refresh(after); }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  void refresh(const state_t<R>& s) {
    for (std::size_t i = 0; i < grid_.size(); ++i) values_[i] = rule_->cdf(s, grid_[i]);
  }
  const R* rule_;
  std::vector<double> grid_;
  std::vector<double> values_;
};

/// Rules may provide an incremental tracker `cdf_tracker(state, grid)`.
template <class R>
concept HasCdfTracker = ScalarRule<R> &&
    requires(const R& rule, const state_t<R>& s, std::span<const double> grid) {
      rule.cdf_tracker(s, grid);
    };

template <ScalarRule R>
auto make_cdf_tracker(const R& rule, const state_t<R>& s, std::span<const double> grid) {
  if constexpr (HasCdfTracker<R>)
    return rule.cdf_tracker(s, grid);
  else
    return GenericCdfTracker<R>(rule, s, grid);
}

template <class Obs>
struct ChainPath {
  std::vector<Obs> observations;
  /// When a grid was given: snapshots[m] = P_m on the grid, m = 0..steps.
  std::vector<std::vector<double>> snapshots;
};

namespace detail {

template <PredictiveRule R>
state_t<R> checked_update(const R& rule, state_t<R> s, const observation_t<R>& x, std::size_t step) {
  const std::size_t before = s.n;
  try {
    s = rule.update(std::move(s), x);
  } catch (const StepError&) {
    throw;
  } catch (const Error& e) {
    throw StepError(step, e.what());
  }
  if (s.n != before + 1) throw StepError(step, "rule update did not advance the step counter by one");
  return s;
}

}  // namespace detail

/// Folds the data into the rule's state, starting from `from`.
template <PredictiveRule R>
state_t<R> condition(const R& rule, state_t<R> from, std::span<const observation_t<R>> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!rule.accepts(data[i]))
      throw ConfigError("observation " + std::to_string(i) + " is outside the rule's sample space");
    from = detail::checked_update(rule, std::move(from), data[i], i + 1);
  }
  return from;
}

template <PredictiveRule R>
state_t<R> condition(const R& rule, std::span<const observation_t<R>> data) {
  return condition(rule, rule.initial_state(), data);
}

template <PredictiveRule R>
state_t<R> condition(const R& rule, const std::vector<observation_t<R>>& data) {
  return condition(rule, std::span<const observation_t<R>>(data));
}

/// Advances `s` by `steps` forward draws; observations are passed to `sink`.
template <PredictiveRule R, class Sink>
state_t<R> run_forward(const R& rule, state_t<R> s, std::size_t steps, RandomSource& rng, Sink&& sink) {
  for (std::size_t m = 0; m < steps; ++m) {
    auto x = rule.draw(s, rng);
    const std::size_t step = s.n + 1;
    s = detail::checked_update(rule, std::move(s), x, step);
    sink(s, x);
  }
  return s;
}

/// Forward simulation through the chain factorization: x_{m+1} ~ P_m.
template <PredictiveRule R>
ChainPath<observation_t<R>> simulate_chain(const R& rule, std::size_t n_steps, RandomSource& rng) {
  ChainPath<observation_t<R>> path;
  path.observations.reserve(n_steps);
  run_forward(rule, rule.initial_state(), n_steps, rng,
              [&](const state_t<R>&, const observation_t<R>& x) { path.observations.push_back(x); });
  return path;
}

/// As above, recording P_m(t) on `grid` for m = 0..n_steps.
template <ScalarRule R>
ChainPath<observation_t<R>> simulate_chain(const R& rule, std::size_t n_steps, RandomSource& rng,
                                           std::span<const double> grid) {
  ChainPath<observation_t<R>> path;
  path.observations.reserve(n_steps);
  path.snapshots.reserve(n_steps + 1);
  auto s = rule.initial_state();
  auto tracker = make_cdf_tracker(rule, s, grid);
  path.snapshots.push_back(tracker.values());
  run_forward(rule, std::move(s), n_steps, rng, [&](const state_t<R>& after, const observation_t<R>& x) {
    tracker.observe(after, x);
    path.observations.push_back(x);
    path.snapshots.push_back(tracker.values());
  });
  return path;
}

/// log p(x_1, ..., x_n) = sum_m log P_{m-1}({x_m}); -inf when some factor is zero.
template <MassRule R>
double log_joint_prob(const R& rule, std::span<const observation_t<R>> sequence) {
  if (!rule.support()) throw UnsupportedOperation("joint_prob requires a finite sample space");
  if (sequence.empty()) throw DomainError("joint_prob of an empty sequence");
  auto s = rule.initial_state();
  double logp = 0.0;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (!rule.accepts(sequence[i]))
      throw ConfigError("observation " + std::to_string(i) + " is outside the rule's sample space");
    const double p = rule.mass(s, sequence[i]);
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    logp += std::log(p);
    if (i + 1 < sequence.size()) s = detail::checked_update(rule, std::move(s), sequence[i], i + 1);
  }
  return logp;
}

template <MassRule R>
double joint_prob(const R& rule, std::span<const observation_t<R>> sequence) {
  return std::exp(log_joint_prob(rule, sequence));
}

template <MassRule R>
double joint_prob(const R& rule, const std::vector<observation_t<R>>& sequence) {
  return joint_prob(rule, std::span<const observation_t<R>>(sequence));
}

}  // namespace predictive
