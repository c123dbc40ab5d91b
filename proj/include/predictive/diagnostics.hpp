#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "predictive/engine.hpp"
#include "predictive/json.hpp"
#include "predictive/rules/species.hpp"
#include "predictive/structured/pcid.hpp"
#include "predictive/structured/reinforced.hpp"

namespace predictive {

enum class Verdict { pass, fail, refused };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::refused: return "refused";
  }
  return "?";
}

inline constexpr std::size_t kEvaluationLimit = 10'000'000;
inline constexpr double kExactTolerance = 1e-12;
inline constexpr double kLogTolerance = 1e-10;
inline constexpr const char* kFiniteHorizonNote = "finite n_max is a necessary-condition filter only";

struct DiagnosticReport {
  std::string check;
  std::string subject;
  Verdict verdict = Verdict::pass;
  double worst = 0.0;
  double tolerance = kExactTolerance;
  Json witness;  // null on pass
  Json bounds;
  std::size_t evaluations = 0;
  std::string note;

  bool passed() const noexcept { return verdict == Verdict::pass; }
};

inline void to_json(Json& j, const DiagnosticReport& r) {
  j = Json{{"check", r.check},       {"subject", r.subject}, {"verdict", to_string(r.verdict)},
           {"worst", r.worst},       {"tolerance", r.tolerance}, {"witness", r.witness},
           {"bounds", r.bounds},     {"evaluations", r.evaluations}, {"note", r.note}};
}

namespace detail {

/// Tracks, per orbit key, the smallest and largest value seen and where.
template <class Witness>
class OrbitTracker {
 public:
  void add(const std::vector<std::size_t>& key, double value, const Witness& where) {
    auto [it, fresh] = stats_.try_emplace(key);
    Stat& s = it->second;
    if (fresh || value < s.lo) {
      s.lo = value;
      s.lo_at = where;
    }
    if (fresh || value > s.hi) {
      s.hi = value;
      s.hi_at = where;
    }
  }

  /// Largest max - min over orbits, with the two witnesses.
  std::tuple<double, Witness, Witness> worst() const {
    double w = 0.0;
    Witness a{}, b{};
    for (const auto& [k, s] : stats_) {
      if (s.hi - s.lo > w) {
        w = s.hi - s.lo;
        a = s.hi_at;
        b = s.lo_at;
      }
    }
    return {w, a, b};
  }

 private:
  struct Stat {
    double lo = 0.0, hi = 0.0;
    Witness lo_at{}, hi_at{};
  };
  std::map<std::vector<std::size_t>, Stat> stats_;
};

inline std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline double power_sum(double base, std::size_t n_max) {
  double s = 0.0, p = 1.0;
  for (std::size_t n = 0; n <= n_max; ++n, p *= base) s += p;
  return s;
}

template <class Obs>
Json sequence_json(const std::vector<Obs>& support, const std::vector<std::size_t>& idx) {
  Json j = Json::array();
  for (auto i : idx) j.push_back(support[i]);
  return j;
}

inline DiagnosticReport refused(std::string check, std::string subject, double cost, Json bounds) {
  DiagnosticReport r;
  r.check = std::move(check);
  r.subject = std::move(subject);
  r.verdict = Verdict::refused;
  r.bounds = std::move(bounds);
  r.bounds["estimated_evaluations"] = cost;
  r.bounds["evaluation_limit"] = kEvaluationLimit;
  r.note = "enumeration exceeds the evaluation limit; not run";
  return r;
}

}  // namespace detail

/// Exchangeability on a finite space: max |p(x) - p(sigma x)| over sequences of
/// length <= n_max, plus the two predictive conditions (symmetric P_n, and the
/// two-step law symmetric in singletons A, B).
template <MassRule R>
DiagnosticReport check_exchangeable(const R& rule, std::size_t n_max, double tolerance = kExactTolerance) {
  using Obs = observation_t<R>;
  const auto support_opt = rule.support();
  if (!support_opt) throw UnsupportedOperation("check_exchangeable requires a finite sample space");
  const std::vector<Obs>& support = *support_opt;
  const std::size_t S = support.size();
  Json bounds{{"n_max", n_max}, {"support_size", S}};
  const double cost = detail::power_sum(static_cast<double>(S), n_max) * (1.0 + 2.0 * S + S * S);
  if (cost > static_cast<double>(kEvaluationLimit)) return detail::refused("exchangeable", rule.name(), cost, bounds);

  using Seq = std::vector<std::size_t>;
  struct TwoStep {
    Seq prefix;
    std::size_t a = 0, b = 0;
  };
  struct Pred {
    Seq prefix;
    std::size_t y = 0;
  };
  detail::OrbitTracker<Seq> joint;
  detail::OrbitTracker<Pred> pred;
  double worst_two = 0.0;
  TwoStep two_at;
  std::size_t evaluations = 0;

  std::function<void(Seq&)> zero_subtree = [&](Seq& seq) {
    joint.add(detail::sorted(seq), 0.0, seq);
    if (seq.size() == n_max) return;
    for (std::size_t y = 0; y < S; ++y) {
      seq.push_back(y);
      zero_subtree(seq);
      seq.pop_back();
    }
  };

  std::function<void(const state_t<R>&, Seq&, double)> visit = [&](const state_t<R>& s, Seq& seq, double logp) {
    if (!seq.empty()) joint.add(detail::sorted(seq), std::exp(logp), seq);
    if (seq.size() == n_max) return;
    std::vector<double> m(S);
    std::vector<std::optional<state_t<R>>> child(S);
    for (std::size_t y = 0; y < S; ++y) {
      m[y] = rule.mass(s, support[y]);
      ++evaluations;
      if (!seq.empty()) pred.add([&] { auto k = detail::sorted(seq); k.push_back(S + y); return k; }(), m[y], Pred{seq, y});
      if (m[y] > 0.0) child[y] = detail::checked_update(rule, state_t<R>(s), support[y], seq.size() + 1);
    }
    for (std::size_t a = 0; a < S; ++a) {
      for (std::size_t b = a + 1; b < S; ++b) {
        const double qab = m[a] > 0.0 ? m[a] * rule.mass(*child[a], support[b]) : 0.0;
        const double qba = m[b] > 0.0 ? m[b] * rule.mass(*child[b], support[a]) : 0.0;
        evaluations += 2;
        if (std::fabs(qab - qba) > worst_two) {
          worst_two = std::fabs(qab - qba);
          two_at = TwoStep{seq, a, b};
        }
      }
    }
    for (std::size_t y = 0; y < S; ++y) {
      seq.push_back(y);
      if (m[y] > 0.0)
        visit(*child[y], seq, logp + std::log(m[y]));
      else
        zero_subtree(seq);
      seq.pop_back();
    }
  };

  Seq seq;
  visit(rule.initial_state(), seq, 0.0);

  DiagnosticReport r;
  r.check = "exchangeable";
  r.subject = rule.name();
  r.tolerance = tolerance;
  r.bounds = bounds;
  r.evaluations = evaluations;
  r.note = kFiniteHorizonNote;
  const auto [wj, ja, jb] = joint.worst();
  const auto [wp, pa, pb] = pred.worst();
  r.worst = std::max({wj, wp, worst_two});
  if (r.worst > tolerance) {
    r.verdict = Verdict::fail;
    if (wj >= wp && wj >= worst_two) {
      r.witness = Json{{"kind", "permutation"},
                       {"a", detail::sequence_json(support, ja)},
                       {"b", detail::sequence_json(support, jb)}};
    } else if (wp >= worst_two) {
      r.witness = Json{{"kind", "predictive-symmetry"},
                       {"a", detail::sequence_json(support, pa.prefix)},
                       {"b", detail::sequence_json(support, pb.prefix)},
                       {"y", support[pa.y]}};
    } else {
      r.witness = Json{{"kind", "two-step"},
                       {"prefix", detail::sequence_json(support, two_at.prefix)},
                       {"A", support[two_at.a]},
                       {"B", support[two_at.b]}};
    }
  }
  return r;
}

/// c.i.d. identity sum_x P_n({x}) P_{n+1}(A | x_{1:n}, x) = P_n(A) for singleton A,
/// over all prefixes of length <= n_max.
template <MassRule R>
DiagnosticReport check_cid(const R& rule, std::size_t n_max, double tolerance = kExactTolerance) {
  using Obs = observation_t<R>;
  const auto support_opt = rule.support();
  if (!support_opt) throw UnsupportedOperation("check_cid requires a finite sample space");
  const std::vector<Obs>& support = *support_opt;
  const std::size_t S = support.size();
  Json bounds{{"n_max", n_max}, {"support_size", S}};
  const double cost = detail::power_sum(static_cast<double>(S), n_max) * (2.0 * S + S * S);
  if (cost > static_cast<double>(kEvaluationLimit)) return detail::refused("cid", rule.name(), cost, bounds);

  using Seq = std::vector<std::size_t>;
  double worst = 0.0;
  Seq worst_prefix;
  std::size_t worst_a = 0;
  std::size_t evaluations = 0;

  std::function<void(const state_t<R>&, Seq&)> visit = [&](const state_t<R>& s, Seq& seq) {
    std::vector<double> m(S);
    std::vector<std::optional<state_t<R>>> child(S);
    for (std::size_t y = 0; y < S; ++y) {
      m[y] = rule.mass(s, support[y]);
      ++evaluations;
      if (m[y] > 0.0) child[y] = detail::checked_update(rule, state_t<R>(s), support[y], seq.size() + 1);
    }
    for (std::size_t a = 0; a < S; ++a) {
      CompensatedSum lhs;
      for (std::size_t y = 0; y < S; ++y)
        if (m[y] > 0.0) {
          lhs.add(m[y] * rule.mass(*child[y], support[a]));
          ++evaluations;
        }
      const double dev = std::fabs(lhs.value() - m[a]);
      if (dev > worst) {
        worst = dev;
        worst_prefix = seq;
        worst_a = a;
      }
    }
    if (seq.size() == n_max) return;
    for (std::size_t y = 0; y < S; ++y) {
      if (!(m[y] > 0.0)) continue;
      seq.push_back(y);
      visit(*child[y], seq);
      seq.pop_back();
    }
  };
  Seq seq;
  visit(rule.initial_state(), seq);

  DiagnosticReport r;
  r.check = "cid";
  r.subject = rule.name();
  r.tolerance = tolerance;
  r.bounds = bounds;
  r.evaluations = evaluations;
  r.worst = worst;
  r.note = kFiniteHorizonNote;
  if (worst > tolerance) {
    r.verdict = Verdict::fail;
    r.witness = Json{{"kind", "martingale"}, {"prefix", detail::sequence_json(support, worst_prefix)},
                     {"A", support[worst_a]}};
  }
  return r;
}

/// Several sequences observed row by row with finite per-column supports.
template <class R>
concept ArrayRule = requires(const R& rule, const typename R::state_type& s, typename R::state_type owned,
                             const Row& row, std::size_t j, const Point& x) {
  { rule.columns() } -> std::convertible_to<std::size_t>;
  { rule.initial_state() } -> std::convertible_to<typename R::state_type>;
  { rule.update(std::move(owned), row) } -> std::convertible_to<typename R::state_type>;
  { rule.row_mass(s, row) } -> std::convertible_to<double>;
  { rule.column_mass(s, j, x) } -> std::convertible_to<double>;
  { rule.column_support(j) } -> std::convertible_to<std::optional<std::vector<Point>>>;
  { rule.name() } -> std::convertible_to<std::string>;
};

namespace detail {

struct RowSpace {
  std::vector<std::vector<Point>> columns;
  std::vector<Row> rows;
  std::vector<std::vector<std::size_t>> coords;  // column-wise support index of each row

  std::size_t find(const std::vector<std::size_t>& c) const {
    return static_cast<std::size_t>(std::find(coords.begin(), coords.end(), c) - coords.begin());
  }
};

template <ArrayRule R>
RowSpace row_space(const R& rule) {
  RowSpace rs;
  for (std::size_t j = 0; j < rule.columns(); ++j) {
    auto s = rule.column_support(j);
    if (!s) throw UnsupportedOperation("array diagnostics require finite column supports");
    rs.columns.push_back(std::move(*s));
  }
  std::vector<std::size_t> c(rs.columns.size(), 0);
  while (true) {
    Row row;
    for (std::size_t j = 0; j < c.size(); ++j) row.push_back(rs.columns[j][c[j]]);
    rs.rows.push_back(std::move(row));
    rs.coords.push_back(c);
    std::size_t j = c.size();
    while (j > 0 && ++c[j - 1] == rs.columns[j - 1].size()) c[--j] = 0;
    if (j == 0) break;
  }
  return rs;
}

/// Orbit key under separate permutations within each column.
inline std::vector<std::size_t> column_multisets(const RowSpace& rs, const std::vector<std::size_t>& seq) {
  std::vector<std::size_t> key;
  const std::size_t k = rs.columns.size();
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<std::size_t> col;
    for (auto r : seq) col.push_back(rs.coords[r][j]);
    std::sort(col.begin(), col.end());
    key.insert(key.end(), col.begin(), col.end());
    key.push_back(std::numeric_limits<std::size_t>::max());
  }
  return key;
}

inline Json array_json(const RowSpace& rs, const std::vector<std::size_t>& seq) {
  Json j = Json::array();
  for (auto r : seq) j.push_back(rs.rows[r]);
  return j;
}

}  // namespace detail

/// Partial exchangeability of an array of k sequences: joint law invariant under
/// separate permutations within columns (arrays of <= n_max rows), plus the
/// row-predictive symmetry and the per-column (A_i, B_i) swap symmetry.
template <ArrayRule R>
DiagnosticReport check_partial_exch(const R& rule, std::size_t n_max, double tolerance = kExactTolerance) {
  const auto rs = detail::row_space(rule);
  const std::size_t Rn = rs.rows.size();
  const std::size_t k = rs.columns.size();
  Json bounds{{"n_max", n_max}, {"columns", k}, {"rows", Rn}};
  const double cost = detail::power_sum(static_cast<double>(Rn), n_max) * (2.0 * Rn + Rn * Rn * (1.0 + k));
  if (cost > static_cast<double>(kEvaluationLimit)) return detail::refused("partial_exchangeable", rule.name(), cost, bounds);

  using Seq = std::vector<std::size_t>;
  struct Pred {
    Seq prefix;
    std::size_t row = 0;
  };
  struct Swap {
    Seq prefix;
    std::size_t a = 0, b = 0, column = 0;
  };
  detail::OrbitTracker<Seq> joint;
  detail::OrbitTracker<Pred> pred;
  double worst_swap = 0.0;
  Swap swap_at;
  std::size_t evaluations = 0;
  using State = typename R::state_type;

  std::function<void(Seq&)> zero_subtree = [&](Seq& seq) {
    joint.add(detail::column_multisets(rs, seq), 0.0, seq);
    if (seq.size() == n_max) return;
    for (std::size_t y = 0; y < Rn; ++y) {
      seq.push_back(y);
      zero_subtree(seq);
      seq.pop_back();
    }
  };

  std::function<void(const State&, Seq&, double)> visit = [&](const State& s, Seq& seq, double logp) {
    if (!seq.empty()) joint.add(detail::column_multisets(rs, seq), std::exp(logp), seq);
    if (seq.size() == n_max) return;
    std::vector<double> m(Rn);
    std::vector<std::optional<State>> child(Rn);
    const auto key = detail::column_multisets(rs, seq);
    for (std::size_t y = 0; y < Rn; ++y) {
      m[y] = rule.row_mass(s, rs.rows[y]);
      ++evaluations;
      if (!seq.empty()) {
        auto kk = key;
        kk.push_back(y);
        pred.add(kk, m[y], Pred{seq, y});
      }
      if (m[y] > 0.0) child[y] = rule.update(State(s), rs.rows[y]);
    }
    auto q = [&](std::size_t a, std::size_t b) {
      ++evaluations;
      return m[a] > 0.0 ? m[a] * rule.row_mass(*child[a], rs.rows[b]) : 0.0;
    };
    for (std::size_t a = 0; a < Rn; ++a) {
      for (std::size_t b = 0; b < Rn; ++b) {
        const double qab = q(a, b);
        for (std::size_t i = 0; i < k; ++i) {
          auto ca = rs.coords[a], cb = rs.coords[b];
          if (ca[i] == cb[i]) continue;
          std::swap(ca[i], cb[i]);
          const double dev = std::fabs(qab - q(rs.find(ca), rs.find(cb)));
          if (dev > worst_swap) {
            worst_swap = dev;
            swap_at = Swap{seq, a, b, i};
          }
        }
      }
    }
    for (std::size_t y = 0; y < Rn; ++y) {
      seq.push_back(y);
      if (m[y] > 0.0)
        visit(*child[y], seq, logp + std::log(m[y]));
      else
        zero_subtree(seq);
      seq.pop_back();
    }
  };
  Seq seq;
  visit(rule.initial_state(), seq, 0.0);

  DiagnosticReport r;
  r.check = "partial_exchangeable";
  r.subject = rule.name();
  r.tolerance = tolerance;
  r.bounds = bounds;
  r.evaluations = evaluations;
  r.note = std::string(kFiniteHorizonNote) + "; checked for the configured k = " + std::to_string(k) + " sequences";
  const auto [wj, ja, jb] = joint.worst();
  const auto [wp, pa, pb] = pred.worst();
  r.worst = std::max({wj, wp, worst_swap});
  if (r.worst > tolerance) {
    r.verdict = Verdict::fail;
    if (wj >= wp && wj >= worst_swap) {
      r.witness = Json{{"kind", "permutation"}, {"a", detail::array_json(rs, ja)}, {"b", detail::array_json(rs, jb)}};
    } else if (wp >= worst_swap) {
      r.witness = Json{{"kind", "predictive-symmetry"},
                       {"a", detail::array_json(rs, pa.prefix)},
                       {"b", detail::array_json(rs, pb.prefix)},
                       {"row", rs.rows[pa.row]}};
    } else {
      r.witness = Json{{"kind", "swap"},
                       {"prefix", detail::array_json(rs, swap_at.prefix)},
                       {"A", rs.rows[swap_at.a]},
                       {"B", rs.rows[swap_at.b]},
                       {"column", swap_at.column}};
    }
  }
  return r;
}

/// Per-column martingale identity: sum_row P_n(row) P_{n+1,j}({a} | past, row) = P_{n,j}({a}).
template <ArrayRule R>
DiagnosticReport check_pcid(const R& rule, std::size_t n_max, double tolerance = kExactTolerance) {
  const auto rs = detail::row_space(rule);
  const std::size_t Rn = rs.rows.size();
  const std::size_t k = rs.columns.size();
  Json bounds{{"n_max", n_max}, {"columns", k}, {"rows", Rn}};
  double per_node = 2.0 * Rn;
  for (const auto& c : rs.columns) per_node += static_cast<double>(Rn * c.size());
  const double cost = detail::power_sum(static_cast<double>(Rn), n_max) * per_node;
  if (cost > static_cast<double>(kEvaluationLimit)) return detail::refused("partial_cid", rule.name(), cost, bounds);

  using Seq = std::vector<std::size_t>;
  using State = typename R::state_type;
  double worst = 0.0;
  Seq worst_prefix;
  std::size_t worst_col = 0, worst_a = 0;
  std::size_t evaluations = 0;

  std::function<void(const State&, Seq&)> visit = [&](const State& s, Seq& seq) {
    std::vector<double> m(Rn);
    std::vector<std::optional<State>> child(Rn);
    for (std::size_t y = 0; y < Rn; ++y) {
      m[y] = rule.row_mass(s, rs.rows[y]);
      ++evaluations;
      if (m[y] > 0.0) child[y] = rule.update(State(s), rs.rows[y]);
    }
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t a = 0; a < rs.columns[j].size(); ++a) {
        CompensatedSum lhs;
        for (std::size_t y = 0; y < Rn; ++y)
          if (m[y] > 0.0) lhs.add(m[y] * rule.column_mass(*child[y], j, rs.columns[j][a]));
        evaluations += Rn + 1;
        const double dev = std::fabs(lhs.value() - rule.column_mass(s, j, rs.columns[j][a]));
        if (dev > worst) {
          worst = dev;
          worst_prefix = seq;
          worst_col = j;
          worst_a = a;
        }
      }
    }
    if (seq.size() == n_max) return;
    for (std::size_t y = 0; y < Rn; ++y) {
      if (!(m[y] > 0.0)) continue;
      seq.push_back(y);
      visit(*child[y], seq);
      seq.pop_back();
    }
  };
  Seq seq;
  visit(rule.initial_state(), seq);

  DiagnosticReport r;
  r.check = "partial_cid";
  r.subject = rule.name();
  r.tolerance = tolerance;
  r.bounds = bounds;
  r.evaluations = evaluations;
  r.worst = worst;
  r.note = kFiniteHorizonNote;
  if (worst > tolerance) {
    r.verdict = Verdict::fail;
    r.witness = Json{{"kind", "martingale"},
                     {"prefix", detail::array_json(rs, worst_prefix)},
                     {"column", worst_col},
                     {"A", rs.columns[worst_col][worst_a]}};
  }
  return r;
}

/// Wraps markov_swap_check: the pairwise swap identity for rules that depend on
/// (last state, its transition-count row). The general string-symmetry
/// condition is not machine-checked.
inline DiagnosticReport check_markov_exch(const RowPredictive& pred, const std::vector<Label>& states,
                                          std::size_t depth, std::string subject = "row-predictive",
                                          double tolerance = kLogTolerance) {
  DiagnosticReport r;
  r.check = "markov_exchangeable";
  r.subject = std::move(subject);
  r.tolerance = tolerance;
  r.bounds = Json{{"depth", depth}, {"states", states.size()}};
  double rows = 1.0;  // number of count rows with total <= depth: C(depth + d, d)
  for (std::size_t i = 1; i <= states.size(); ++i)
    rows = rows * static_cast<double>(depth + i) / static_cast<double>(i);
  const double d = static_cast<double>(states.size());
  const double cost = rows * d * d * d * 2.0;
  if (cost > static_cast<double>(kEvaluationLimit)) return detail::refused(r.check, r.subject, cost, r.bounds);
  const auto res = markov_swap_check(pred, states, depth, tolerance);
  r.worst = res.worst;
  r.evaluations = static_cast<std::size_t>(cost);
  r.note = "checks the pairwise swap identity for every row with total <= depth; the general "
           "condition on string symmetries is not machine-checked";
  if (!res.violations.empty()) {
    r.verdict = Verdict::fail;
    const auto& w = res.worst_case;
    r.witness = Json{{"kind", "swap"}, {"x", w.x.value}, {"y", w.y.value}, {"z", w.z.value}, {"row", w.row},
                     {"violations", res.violations.size()}};
  }
  return r;
}

namespace detail {

/// Calls f(counts) for every set partition of {1..n} (restricted growth strings).
inline void for_each_set_partition(std::size_t n, const std::function<void(const PartitionCounts&)>& f) {
  if (n == 0) return;
  std::vector<std::size_t> sizes;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      f(PartitionCounts(sizes));
      return;
    }
    for (std::size_t b = 0; b <= sizes.size(); ++b) {
      if (b == sizes.size())
        sizes.push_back(1);
      else
        ++sizes[b];
      rec(i + 1);
      if (sizes[b] == 1 && b + 1 == sizes.size())
        sizes.pop_back();
      else
        --sizes[b];
    }
  };
  rec(0);
}

}  // namespace detail

/// EPPF axioms up to n_max: p(1) = 1, additivity p(n) = sum_j p(n^{j+}),
/// symmetry in block order, and total mass 1 over all set partitions of n.
inline DiagnosticReport check_eppf(const EppfSpec& eppf, std::size_t n_max, double tolerance = kLogTolerance) {
  DiagnosticReport r;
  r.check = "eppf";
  r.subject = eppf.name;
  r.tolerance = tolerance;
  r.bounds = Json{{"n_max", n_max}};
  r.note = kFiniteHorizonNote;
  double bell = 1.0;  // Bell numbers grow fast; cap via a running estimate
  {
    std::vector<double> row{1.0};
    double total = 0.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
      std::vector<double> next{row.back()};
      for (double v : row) next.push_back(next.back() + v);
      row = std::move(next);
      total += row.front() * static_cast<double>(n + 1);
    }
    bell = total;
  }
  if (bell > static_cast<double>(kEvaluationLimit)) return detail::refused(r.check, r.subject, bell, r.bounds);

  auto consider = [&](double dev, const char* kind, Json where) {
    ++r.evaluations;
    if (dev > r.worst) {
      r.worst = dev;
      r.witness = Json{{"kind", kind}, {"counts", std::move(where)}};
    }
  };

  if (n_max >= 1) consider(std::fabs(eppf(PartitionCounts({1})) - 1.0), "unit", Json::array({1}));
  std::map<std::vector<std::size_t>, bool> seen;
  for (std::size_t n = 1; n <= n_max; ++n) {
    CompensatedSum mass;
    detail::for_each_set_partition(n, [&](const PartitionCounts& c) {
      const double p = eppf(c);
      mass.add(p);
      if (seen.emplace(c.sizes(), true).second) {
        if (n < n_max) {
          CompensatedSum split;
          for (std::size_t j = 0; j <= c.k(); ++j) split.add(eppf(c.incremented(j)));
          consider(std::fabs(p - split.value()), "additivity", c.sizes());
        }
        auto perm = c.sizes();
        std::sort(perm.begin(), perm.end());
        do {
          consider(std::fabs(p - eppf(PartitionCounts(perm))), "symmetry", Json{{"a", c.sizes()}, {"b", perm}});
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
    });
    consider(std::fabs(mass.value() - 1.0), "total-mass", Json{{"n", n}});
  }
  if (r.worst > tolerance) {
    r.verdict = Verdict::fail;
  } else {
    r.witness = nullptr;
  }
  return r;
}

}  // namespace predictive
