#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "predictive/engine.hpp"

namespace predictive {

enum class TerminalEstimator { predictive, empirical };

struct ResamplingPlan {
  std::size_t horizon = 0;  // N; 0 means n + 5000
  std::size_t replicates = 2000;
  std::vector<double> grid;
  TerminalEstimator estimator = TerminalEstimator::predictive;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

inline constexpr std::size_t kDefaultFutureSteps = 5000;

/// M x k matrix of terminal values with run metadata.
struct PosteriorSample {
  std::string rule;
  std::size_t horizon = 0;
  std::size_t replicates = 0;
  std::size_t observed = 0;
  std::vector<double> grid;
  TerminalEstimator estimator = TerminalEstimator::predictive;
  std::uint64_t seed = 0;
  std::string data_digest;
  std::size_t columns = 0;
  std::vector<double> values;  // row-major

  double operator()(std::size_t r, std::size_t c) const { return values[r * columns + c]; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(replicates);
    for (std::size_t r = 0; r < replicates; ++r) out[r] = (*this)(r, c);
    return out;
  }
};

/// FNV-1a over the textual form of the observations.
template <class Obs>
std::string data_digest(std::span<const Obs> data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& x : data) feed(describe(x));
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xf];
  return out;
}

namespace detail {

inline void validate_plan(const ResamplingPlan& plan, std::size_t observed, bool needs_grid) {
  if (plan.replicates == 0) throw ConfigError("resampling: replicates must be >= 1");
  if (plan.horizon != 0 && plan.horizon < observed)
    throw ConfigError("resampling: horizon N=" + std::to_string(plan.horizon) + " is below the data length " +
                      std::to_string(observed));
  if (needs_grid && plan.grid.empty()) throw ConfigError("resampling: grid must not be empty");
  for (std::size_t i = 1; i < plan.grid.size(); ++i)
    if (!(plan.grid[i] > plan.grid[i - 1])) throw ConfigError("resampling: grid must be strictly increasing");
}

inline std::size_t resolved_horizon(const ResamplingPlan& plan, std::size_t observed) {
  return plan.horizon == 0 ? observed + kDefaultFutureSteps : plan.horizon;
}

/// Runs job(r) for r in [0, m) on `workers` threads. The first failure by
/// replicate index is rethrown, so errors are schedule independent too.
inline void parallel_replicates(std::size_t m, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::clamp<std::size_t>(workers, 1, m);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = m;
  std::exception_ptr failure;
  auto loop = [&] {
    for (std::size_t r = next++; r < m; r = next++) {
      try {
        job(r);
      } catch (...) {
        std::lock_guard lock(mu);
        if (r < failed_at) {
          failed_at = r;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

template <class E>
[[noreturn]] void rethrow_for_replicate(const E& e, std::size_t r) {
  throw E("replicate " + std::to_string(r) + ": " + e.what());
}

/// Rethrows the active library error with the replicate index prepended.
inline void annotate_replicate(std::size_t r) {
  try {
    throw;
  } catch (const StepError& e) {
    throw StepError(e.step(), "replicate " + std::to_string(r) + ": " + e.what());
  } catch (const ConfigError& e) {
    rethrow_for_replicate(e, r);
  } catch (const DomainError& e) {
    rethrow_for_replicate(e, r);
  } catch (const UnsupportedOperation& e) {
    rethrow_for_replicate(e, r);
  } catch (const ConditioningOnNull& e) {
    rethrow_for_replicate(e, r);
  } catch (const Error& e) {
    rethrow_for_replicate(e, r);
  }
}

/// Core loop: per replicate, continue the conditioned state to the horizon
/// with RandomSource(seed).branch(r) and record `record(r, terminal, counts)`.
template <PredictiveRule R, class Record, class Observe>
void run_replicates(const R& rule, const state_t<R>& conditioned, std::size_t horizon, const ResamplingPlan& plan,
                    Observe&& observe_factory, Record&& record) {
  const std::size_t future = horizon - conditioned.n;
  const RandomSource root(plan.seed);
  parallel_replicates(plan.replicates, plan.workers, [&](std::size_t r) {
    try {
      RandomSource rng = root.branch(r);
      auto observer = observe_factory();
      auto terminal = run_forward(rule, conditioned, future, rng,
                                  [&](const state_t<R>&, const observation_t<R>& x) { observer(x); });
      record(r, terminal, observer);
    } catch (const Error&) {
      annotate_replicate(r);
    }
  });
}

/// Counts observations at or below each grid point (for the empirical estimator).
struct BelowCounter {
  const std::vector<double>* grid = nullptr;
  std::vector<std::size_t> below;

  void operator()(const Point& x) {
    const double v = scalar_value(x);
    for (std::size_t j = 0; j < grid->size(); ++j)
      if (v <= (*grid)[j]) ++below[j];
  }
  template <class Obs>
  void operator()(const Obs&) {}
};

}  // namespace detail

template <ScalarRule R>
PosteriorSample sample_posterior(const R& rule, std::span<const observation_t<R>> data, const ResamplingPlan& plan) {
  detail::validate_plan(plan, data.size(), true);
  const std::size_t horizon = detail::resolved_horizon(plan, data.size());
  const auto conditioned = condition(rule, data);
  const std::size_t k = plan.grid.size();

  PosteriorSample out;
  out.rule = rule.name();
  out.horizon = horizon;
  out.replicates = plan.replicates;
  out.observed = data.size();
  out.grid = plan.grid;
  out.estimator = plan.estimator;
  out.seed = plan.seed;
  out.data_digest = data_digest(data);
  out.columns = k;
  out.values.assign(plan.replicates * k, 0.0);

  std::vector<std::size_t> data_below(k, 0);
  if (plan.estimator == TerminalEstimator::empirical) {
    if (horizon == 0) throw DomainError("resampling: empirical estimator needs N >= 1");
    detail::BelowCounter c{&plan.grid, std::vector<std::size_t>(k, 0)};
    for (const auto& x : data) c(x);
    data_below = c.below;
  }

  auto factory = [&] { return detail::BelowCounter{&plan.grid, data_below}; };
  detail::run_replicates(rule, conditioned, horizon, plan, factory,
                         [&](std::size_t r, const state_t<R>& terminal, const detail::BelowCounter& counts) {
                           double* row = out.values.data() + r * k;
                           for (std::size_t j = 0; j < k; ++j) {
                             row[j] = plan.estimator == TerminalEstimator::predictive
                                          ? rule.cdf(terminal, plan.grid[j])
                                          : static_cast<double>(counts.below[j]) / static_cast<double>(horizon);
                           }
                         });
  return out;
}

template <ScalarRule R>
PosteriorSample sample_posterior(const R& rule, const std::vector<observation_t<R>>& data, const ResamplingPlan& plan) {
  return sample_posterior(rule, std::span<const observation_t<R>>(data), plan);
}

template <ScalarRule R>
PosteriorSample sample_prior(const R& rule, const ResamplingPlan& plan) {
  return sample_posterior(rule, std::span<const observation_t<R>>(), plan);
}

/// As sample_posterior, recording extractor(terminal state) instead of grid values.
template <PredictiveRule R, class Extractor>
PosteriorSample functional_posterior(const R& rule, std::span<const observation_t<R>> data, const ResamplingPlan& plan,
                                     Extractor&& extractor) {
  detail::validate_plan(plan, data.size(), false);
  const std::size_t horizon = detail::resolved_horizon(plan, data.size());
  const auto conditioned = condition(rule, data);

  PosteriorSample out;
  out.rule = rule.name();
  out.horizon = horizon;
  out.replicates = plan.replicates;
  out.observed = data.size();
  out.grid = plan.grid;
  out.estimator = plan.estimator;
  out.seed = plan.seed;
  out.data_digest = data_digest(data);

  std::vector<std::vector<double>> rows(plan.replicates);
  auto factory = [] { return [](const observation_t<R>&) {}; };
  detail::run_replicates(rule, conditioned, horizon, plan, factory,
                         [&](std::size_t r, const state_t<R>& terminal, const auto&) {
                           rows[r] = extractor(terminal);
                         });
  out.columns = rows.front().size();
  out.values.reserve(plan.replicates * out.columns);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != out.columns)
      throw ConfigError("replicate " + std::to_string(r) + ": extractor returned a vector of different length");
    out.values.insert(out.values.end(), rows[r].begin(), rows[r].end());
  }
  return out;
}

template <PredictiveRule R, class Extractor>
PosteriorSample functional_posterior(const R& rule, const std::vector<observation_t<R>>& data,
                                     const ResamplingPlan& plan, Extractor&& extractor) {
  return functional_posterior(rule, std::span<const observation_t<R>>(data), plan,
                              std::forward<Extractor>(extractor));
}

}  // namespace predictive
