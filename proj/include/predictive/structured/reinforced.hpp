#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "predictive/engine.hpp"
#include "predictive/measure.hpp"

namespace predictive {

/// Transition counts t_{x,y} of a path started at x_0.
struct TransitionCounts {
  std::map<std::pair<Label, Label>, std::size_t> counts;
  Label initial;
  Label current;
  std::size_t n = 0;

  std::size_t count(Label x, Label y) const {
    auto it = counts.find({x, y});
    return it == counts.end() ? 0 : it->second;
  }

  /// Number of transitions out of x so far.
  std::size_t row_total(Label x) const {
    std::size_t s = 0;
    for (auto it = counts.lower_bound({x, Label{INT64_MIN}}); it != counts.end() && it->first.first == x; ++it)
      s += it->second;
    return s;
  }
};

/// Hoppe urn attached to state x: alpha_x black mass, colour law q_x.
struct UrnParams {
  double alpha = 1.0;
  DiscreteDistribution q;
};

using ReinforcedParams = std::map<Label, UrnParams>;

/// P(X_{n+1} = y | x_{0:n}) = (alpha_x q_x(y) + t_{x,y}) / (alpha_x + sum_j t_{x,j}), x = x_n.
inline DiscreteDistribution reinforced_predict(const TransitionCounts& tc, const ReinforcedParams& params) {
  auto it = params.find(tc.current);
  if (it == params.end())
    throw ConfigError("reinforced urn: no parameters for state " + std::to_string(tc.current.value));
  const auto& [alpha, q] = it->second;
  if (!(alpha > 0.0)) throw ConfigError("reinforced urn: alpha must be > 0");
  std::set<Label> support;
  for (const auto& l : q.labels()) support.insert(std::get<Label>(l));
  for (auto c = tc.counts.lower_bound({tc.current, Label{INT64_MIN}});
       c != tc.counts.end() && c->first.first == tc.current; ++c)
    support.insert(c->first.second);
  const double denom = alpha + static_cast<double>(tc.row_total(tc.current));
  std::vector<Point> labels;
  std::vector<double> probs;
  for (Label y : support) {
    labels.emplace_back(y);
    probs.push_back((alpha * q.mass(Point{y}) + static_cast<double>(tc.count(tc.current, y))) / denom);
  }
  return DiscreteDistribution(std::move(labels), std::move(probs));
}

/// Reinforced urn scheme started at x_0: a Markov exchangeable chain whose
/// successors of each state form a Pólya sequence.
class ReinforcedUrnRule {
 public:
  using state_type = TransitionCounts;
  using observation_type = Point;

  ReinforcedUrnRule(Label x0, ReinforcedParams params) : x0_(x0), params_(std::move(params)) {
    std::set<Label> states;
    for (const auto& [x, p] : params_) {
      if (!(p.alpha > 0.0)) throw ConfigError("reinforced urn: alpha must be > 0");
      if (p.q.size() == 0 || p.q.kind() != PointKind::categorical)
        throw ConfigError("reinforced urn: q_x must be a categorical law");
      states.insert(x);
      for (const auto& l : p.q.labels()) states.insert(std::get<Label>(l));
    }
    if (!params_.count(x0_)) throw ConfigError("reinforced urn: no parameters for the initial state");
    for (Label s : states) states_.emplace_back(s);
  }

  TransitionCounts initial_state() const { return TransitionCounts{{}, x0_, x0_, 0}; }

  TransitionCounts update(TransitionCounts s, const Point& x) const {
    const Label y = std::get<Label>(x);
    ++s.counts[{s.current, y}];
    s.current = y;
    ++s.n;
    return s;
  }

  DiscreteDistribution predict(const TransitionCounts& s) const { return reinforced_predict(s, params_); }

  Point draw(const TransitionCounts& s, RandomSource& rng) const { return sample(predict(s), rng); }

  double mass(const TransitionCounts& s, const Point& x) const {
    auto it = params_.find(s.current);
    if (it == params_.end())
      throw ConfigError("reinforced urn: no parameters for state " + std::to_string(s.current.value));
    const Label y = std::get<Label>(x);
    return (it->second.alpha * it->second.q.mass(x) + static_cast<double>(s.count(s.current, y))) /
           (it->second.alpha + static_cast<double>(s.row_total(s.current)));
  }

  bool accepts(const Point& x) const {
    return std::find(states_.begin(), states_.end(), x) != states_.end();
  }
  std::optional<std::vector<Point>> support() const { return states_; }
  const ReinforcedParams& params() const noexcept { return params_; }
  Label initial() const noexcept { return x0_; }
  std::string name() const { return "reinforced-urn"; }

 private:
  Label x0_;
  ReinforcedParams params_;
  std::vector<Point> states_;
};

/// S_{x,n}: the state visited right after the n-th visit to x.
struct SuccessorTable {
  std::map<Label, std::vector<Label>> successors;

  std::size_t total() const {
    std::size_t s = 0;
    for (const auto& [x, v] : successors) s += v.size();
    return s;
  }
};

/// Successors in visit order; the final visit (without a successor) is dropped.
inline SuccessorTable successor_states(const std::vector<Label>& path) {
  SuccessorTable t;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) t.successors[path[i]].push_back(path[i + 1]);
  return t;
}

/// Rebuilds the path from x_0 by consuming successor lists in order.
inline std::vector<Label> replay_path(Label x0, const SuccessorTable& table) {
  std::map<Label, std::size_t> cursor;
  std::vector<Label> path{x0};
  const std::size_t total = table.total();
  Label cur = x0;
  for (std::size_t i = 0; i < total; ++i) {
    auto it = table.successors.find(cur);
    if (it == table.successors.end() || cursor[cur] >= it->second.size()) break;
    cur = it->second[cursor[cur]++];
    path.push_back(cur);
  }
  return path;
}

/// Predictive depending on (last state x, row t_x): p(y | x, t).
/// Rows are indexed like the `states` vector handed to markov_swap_check.
using RowPredictive = std::function<double(Label y, Label x, const std::vector<std::size_t>& row)>;

struct SwapViolation {
  Label x, y, z;
  std::vector<std::size_t> row;
  double magnitude = 0.0;
};

struct SwapCheckResult {
  std::vector<SwapViolation> violations;
  double worst = 0.0;
  SwapViolation worst_case;
  std::size_t rows_checked = 0;
};

namespace detail {

inline void for_each_row(std::size_t dim, std::size_t depth, const std::function<void(std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> row(dim, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i == dim) {
      f(row);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      row[i] = v;
      rec(i + 1, left - v);
    }
    row[i] = 0;
  };
  rec(0, depth);
}

}  // namespace detail

/// Checks p(y|x,t) p(z|x,t+e_y) = p(z|x,t) p(y|x,t+e_z) for every state x,
/// every y, z and every row t with total count <= depth.
inline SwapCheckResult markov_swap_check(const RowPredictive& pred, const std::vector<Label>& states,
                                         std::size_t depth, double tolerance = 1e-10) {
  SwapCheckResult out;
  const std::size_t d = states.size();
  detail::for_each_row(d, depth, [&](std::vector<std::size_t>& t) {
    ++out.rows_checked;
    for (Label x : states) {
      for (std::size_t iy = 0; iy < d; ++iy) {
        for (std::size_t iz = iy + 1; iz < d; ++iz) {
          const Label y = states[iy], z = states[iz];
          const double py = pred(y, x, t);
          const double pz = pred(z, x, t);
          ++t[iy];
          const double pz_after_y = pred(z, x, t);
          --t[iy];
          ++t[iz];
          const double py_after_z = pred(y, x, t);
          --t[iz];
          const double diff = std::fabs(py * pz_after_y - pz * py_after_z);
          if (diff > out.worst) {
            out.worst = diff;
            out.worst_case = SwapViolation{x, y, z, t, diff};
          }
          if (diff > tolerance) out.violations.push_back(SwapViolation{x, y, z, t, diff});
        }
      }
    }
  });
  return out;
}

/// The reinforced-urn predictive in row form.
inline RowPredictive reinforced_row_predictive(ReinforcedParams params, std::vector<Label> states) {
  return [params = std::move(params), states = std::move(states)](Label y, Label x,
                                                                  const std::vector<std::size_t>& row) {
    const auto& p = params.at(x);
    double total = 0.0;
    double ty = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      total += static_cast<double>(row[i]);
      if (states[i] == y) ty = static_cast<double>(row[i]);
    }
    return (p.alpha * p.q.mass(Point{y}) + ty) / (p.alpha + total);
  };
}

}  // namespace predictive
