#include <catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "predictive/predictive.hpp"

using namespace predictive;
using Catch::Matchers::WithinAbs;

namespace {

Point lab(std::int64_t i) { return Point{Label{i}}; }

ReinforcedParams uniform_params(std::int64_t k, double alpha) {
  std::vector<Point> labels;
  for (std::int64_t i = 0; i < k; ++i) labels.push_back(lab(i));
  ReinforcedParams p;
  for (std::int64_t x = 0; x < k; ++x) p[Label{x}] = UrnParams{alpha, DiscreteDistribution::uniform(labels)};
  return p;
}

std::vector<Label> state_labels(std::int64_t k) {
  std::vector<Label> v;
  for (std::int64_t i = 0; i < k; ++i) v.push_back(Label{i});
  return v;
}

// Pearson statistic for observed counts against expected probabilities.
double pearson(const std::vector<double>& observed, const std::vector<double>& probs, double total) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * total;
    chi2 += (observed[i] - e) * (observed[i] - e) / e;
  }
  return chi2;
}

}  // namespace

TEST_CASE("reinforced urn with an empty row returns q", "[structured-rules]") {
  ReinforcedParams params;
  params[Label{0}] = UrnParams{2.0, DiscreteDistribution({lab(0), lab(1), lab(2)}, {0.2, 0.3, 0.5})};
  params[Label{1}] = UrnParams{1.0, DiscreteDistribution::uniform({lab(0), lab(1), lab(2)})};
  TransitionCounts tc{{{{Label{1}, Label{2}}, 3}}, Label{1}, Label{0}, 3};
  const auto d = reinforced_predict(tc, params);
  REQUIRE(d.mass(lab(0)) == 0.2);
  REQUIRE(d.mass(lab(1)) == 0.3);
  REQUIRE(d.mass(lab(2)) == 0.5);
}

TEST_CASE("reinforced urn arithmetic example", "[structured-rules]") {
  const ReinforcedUrnRule rule(Label{0}, uniform_params(2, 1.0));
  // Path 0 -> 0 -> 1 -> 0: one transition 0->0 seen before the current visit of 0.
  auto s = condition(rule, std::vector<Point>{lab(0), lab(1), lab(0)});
  // Row of state 0 holds 0->0 and 0->1.
  REQUIRE_THAT(rule.mass(s, lab(0)), WithinAbs(1.5 / 3.0, 1e-15));
  const ReinforcedUrnRule rule2(Label{0}, uniform_params(2, 1.0));
  auto s2 = condition(rule2, std::vector<Point>{lab(0)});
  REQUIRE_THAT(rule2.mass(s2, lab(0)), WithinAbs(0.75, 1e-15));
  REQUIRE_THAT(rule2.predict(s2).mass(lab(0)), WithinAbs(0.75, 1e-15));
}

TEST_CASE("reinforced urn rejects states without parameters", "[structured-rules]") {
  ReinforcedParams params;
  params[Label{0}] = UrnParams{1.0, DiscreteDistribution::uniform({lab(0), lab(1)})};
  const TransitionCounts tc{{}, Label{0}, Label{1}, 0};
  REQUIRE_THROWS_AS(reinforced_predict(tc, params), ConfigError);
  REQUIRE_THROWS_AS(ReinforcedUrnRule(Label{5}, params), ConfigError);
}

TEST_CASE("reinforced urn successors follow Pólya predictives", "[structured-rules]") {
  ReinforcedParams params;
  params[Label{0}] = UrnParams{1.5, DiscreteDistribution({lab(0), lab(1), lab(2)}, {0.2, 0.3, 0.5})};
  params[Label{1}] = UrnParams{0.7, DiscreteDistribution({lab(0), lab(1), lab(2)}, {0.6, 0.2, 0.2})};
  params[Label{2}] = UrnParams{3.0, DiscreteDistribution::uniform({lab(0), lab(1), lab(2)})};
  const ReinforcedUrnRule rule(Label{0}, params);
  RandomSource rng(17);
  const auto path = simulate_chain(rule, 400, rng);

  // Replay: the probability the chain gave to each step equals the Pólya
  // predictive of that state's successor sequence so far.
  std::map<Label, std::vector<int>> seen;
  auto s = rule.initial_state();
  for (const auto& x : path.observations) {
    const Label cur = s.current;
    const auto& p = params.at(cur);
    const auto expect = oracle::dirichlet_predictive(p.alpha, p.q.probs(), seen[cur]);
    for (int y = 0; y < 3; ++y) REQUIRE_THAT(rule.mass(s, lab(y)), WithinAbs(expect[y], 1e-14));
    seen[cur].push_back(static_cast<int>(std::get<Label>(x).value));
    s = rule.update(std::move(s), x);
  }
}

TEST_CASE("successor state examples", "[structured-rules]") {
  const Label a{0}, b{1};
  auto t = successor_states({a, b, a});
  REQUIRE(t.successors[a] == std::vector<Label>{b});
  REQUIRE(t.successors[b] == std::vector<Label>{a});
  t = successor_states({a, a, a});
  REQUIRE(t.successors[a] == std::vector<Label>{a, a});
  REQUIRE(t.successors.size() == 1);
}

TEST_CASE("successor table of a long path", "[structured-rules]") {
  RandomSource rng(4);
  std::vector<Label> path;
  for (int i = 0; i < 10000; ++i) path.push_back(Label{static_cast<std::int64_t>(rng.index(3))});
  const auto t = successor_states(path);
  REQUIRE(t.total() == 9999);
  REQUIRE(replay_path(path.front(), t) == path);
}

TEST_CASE("reinforced chain path replays from its successor table", "[structured-rules]") {
  const ReinforcedUrnRule rule(Label{1}, uniform_params(3, 0.5));
  RandomSource rng(6);
  const auto sim = simulate_chain(rule, 500, rng);
  std::vector<Label> path{Label{1}};
  for (const auto& x : sim.observations) path.push_back(std::get<Label>(x));
  REQUIRE(replay_path(Label{1}, successor_states(path)) == path);
}

TEST_CASE("swap check passes for the reinforced urn", "[structured-rules]") {
  ReinforcedParams params;
  params[Label{0}] = UrnParams{1.5, DiscreteDistribution({lab(0), lab(1), lab(2)}, {0.2, 0.3, 0.5})};
  params[Label{1}] = UrnParams{0.7, DiscreteDistribution({lab(0), lab(1), lab(2)}, {0.6, 0.2, 0.2})};
  params[Label{2}] = UrnParams{3.0, DiscreteDistribution::uniform({lab(0), lab(1), lab(2)})};
  const auto states = state_labels(3);
  const auto r = markov_swap_check(reinforced_row_predictive(params, states), states, 4);
  REQUIRE(r.violations.empty());
  REQUIRE(r.worst < 1e-12);
  // Rows t in N^3 with sum <= 4: C(7,3) = 35.
  REQUIRE(r.rows_checked == 35);
}

TEST_CASE("swap check finds violations for squared reinforcement", "[structured-rules]") {
  const auto states = state_labels(3);
  const RowPredictive squared = [](Label y, Label, const std::vector<std::size_t>& row) {
    double total = 0.0, ty = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double c = static_cast<double>(row[i] + 1) * static_cast<double>(row[i] + 1);
      total += c;
      if (static_cast<std::int64_t>(i) == y.value) ty = c;
    }
    return ty / total;
  };
  const auto r = markov_swap_check(squared, states, 4);
  REQUIRE_FALSE(r.violations.empty());
  REQUIRE(r.worst > 1e-3);
  // The reported witness really breaks the identity.
  const auto& w = r.worst_case;
  auto t = w.row;
  const double py = squared(w.y, w.x, t), pz = squared(w.z, w.x, t);
  ++t[static_cast<std::size_t>(w.y.value)];
  const double pz_y = squared(w.z, w.x, t);
  --t[static_cast<std::size_t>(w.y.value)];
  ++t[static_cast<std::size_t>(w.z.value)];
  const double py_z = squared(w.y, w.x, t);
  REQUIRE_THAT(std::fabs(py * pz_y - pz * py_z), WithinAbs(w.magnitude, 1e-15));
}

TEST_CASE("swap check passes for a constant rule", "[structured-rules]") {
  const auto states = state_labels(3);
  const std::vector<double> q{0.1, 0.6, 0.3};
  const auto r = markov_swap_check(
      [&q](Label y, Label, const std::vector<std::size_t>&) { return q[static_cast<std::size_t>(y.value)]; },
      states, 4);
  REQUIRE(r.violations.empty());
  REQUIRE(r.worst == 0.0);
}

TEST_CASE("franchise first customer draws from the base", "[structured-rules]") {
  RandomSource rng(1);
  auto s = make_franchise({1.0, 2.0}, 1.0, BaseMeasure::uniform(0.0, 1.0));
  const auto d = franchise_next(s, 1, rng);
  REQUIRE(d.new_table);
  REQUIRE(d.table == 0);
  REQUIRE(std::holds_alternative<double>(d.color));
  REQUIRE(d.state.oracle.draws.size() == 1);
  REQUIRE_THROWS_AS(franchise_next(s, 2, rng), ConfigError);
  REQUIRE_THROWS_AS(make_franchise({1.0, 0.0}, 1.0, BaseMeasure::tags()), ConfigError);
}

TEST_CASE("franchise tables are painted once", "[structured-rules]") {
  RandomSource rng(2);
  auto s = make_franchise({1.0, 0.5, 3.0}, 2.0, BaseMeasure::tags());
  for (int i = 0; i < 600; ++i) {
    const std::size_t j = static_cast<std::size_t>(i % 3);
    const auto before = s.restaurants[j];
    auto d = franchise_next(std::move(s), j, rng);
    s = std::move(d.state);
    const auto& r = s.restaurants[j];
    REQUIRE(r.table_sizes.size() == r.table_colors.size());
    REQUIRE(r.table_colors[d.table] == d.color);
    if (!d.new_table) REQUIRE(before.table_colors[d.table] == d.color);
    REQUIRE(std::accumulate(r.table_sizes.begin(), r.table_sizes.end(), std::size_t{0}) == r.customers);
  }
  std::size_t tables = 0;
  for (const auto& r : s.restaurants) tables += r.table_sizes.size();
  REQUIRE(tables == s.oracle.draws.size());
}

TEST_CASE("franchise sharing vanishes as gamma grows", "[structured-rules]") {
  const auto shared_fraction = [](double gamma) {
    RandomSource root(77);
    double shared = 0.0, total = 0.0;
    for (int r = 0; r < 200; ++r) {
      RandomSource rng = root.branch(static_cast<std::uint64_t>(r));
      auto s = make_franchise({1.0, 1.0}, gamma, BaseMeasure::tags());
      for (int i = 0; i < 40; ++i) s = franchise_next(std::move(s), static_cast<std::size_t>(i % 2), rng).state;
      const auto& c0 = s.restaurants[0].table_colors;
      const std::set<Point> other(s.restaurants[1].table_colors.begin(), s.restaurants[1].table_colors.end());
      for (const auto& c : c0) {
        shared += other.count(c) ? 1.0 : 0.0;
        total += 1.0;
      }
    }
    return shared / total;
  };
  const double low = shared_fraction(0.5), mid = shared_fraction(20.0), high = shared_fraction(1e9);
  REQUIRE(low > mid);
  REQUIRE(mid > high);
  REQUIRE(high < 1e-3);
  REQUIRE(shared_fraction(std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("single franchise restaurant seats like a CRP", "[structured-rules]") {
  const double alpha = 1.3;
  const std::size_t n = 4;
  const int reps = 100000;
  const auto parts = oracle::set_partitions(n);
  // Canonical labeling -> cell index; expected probability from the sequential oracle.
  std::map<std::vector<std::size_t>, std::size_t> cell;
  std::vector<double> probs;
  {
    // Enumerate canonical labelings (restricted growth strings) of length 4.
    std::vector<std::vector<std::size_t>> rgs{{0}};
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<std::vector<std::size_t>> next;
      for (const auto& g : rgs) {
        const std::size_t m = *std::max_element(g.begin(), g.end());
        for (std::size_t b = 0; b <= m + 1; ++b) {
          auto h = g;
          h.push_back(b);
          next.push_back(h);
        }
      }
      rgs = std::move(next);
    }
    REQUIRE(rgs.size() == parts.size());
    for (const auto& g : rgs) {
      cell[g] = probs.size();
      probs.push_back(oracle::py_sequential_labels(g, alpha, 0.0));
    }
  }
  std::vector<double> observed(probs.size(), 0.0);
  RandomSource root(2024);
  for (int r = 0; r < reps; ++r) {
    RandomSource rng = root.branch(static_cast<std::uint64_t>(r));
    auto s = make_franchise({alpha}, std::numeric_limits<double>::infinity(), BaseMeasure::tags());
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < n; ++i) {
      auto d = franchise_next(std::move(s), 0, rng);
      labels.push_back(d.table);
      s = std::move(d.state);
    }
    observed[cell.at(labels)] += 1.0;
  }
  const double chi2 = pearson(observed, probs, reps);
  REQUIRE(chi2 < oracle::chi2_quantile(static_cast<double>(probs.size() - 1), 0.99));
}

TEST_CASE("ihmm first state comes from the base", "[structured-rules]") {
  RandomSource rng(9);
  const auto d = ihmm_next(make_ihmm(1.0, 1.0, BaseMeasure::uniform(0.0, 1.0)), rng);
  REQUIRE(d.from_oracle);
  REQUIRE(std::holds_alternative<double>(d.next));
  REQUIRE(d.state.urns.size() == 1);
  REQUIRE(d.state.n == 1);
}

TEST_CASE("ihmm distinct states grow by at most one per step", "[structured-rules]") {
  RandomSource rng(10);
  auto s = make_ihmm(1.0, 2.0, BaseMeasure::tags());
  std::set<Point> distinct;
  std::size_t prev = 0;
  for (std::size_t step = 1; step <= 500; ++step) {
    auto d = ihmm_next(std::move(s), rng);
    s = std::move(d.state);
    distinct.insert(d.next);
    REQUIRE(distinct.size() >= prev);
    REQUIRE(distinct.size() <= step + 1);
    REQUIRE(s.urns.size() == distinct.size());
    prev = distinct.size();
  }
}

TEST_CASE("ihmm replays as reinforced urns given the oracle draws", "[structured-rules]") {
  const double alpha = 1.5, gamma = 2.0;
  RandomSource rng(12);
  auto s = make_ihmm(alpha, gamma, BaseMeasure::tags());
  // Independent bookkeeping: successor lists per state and the oracle draws.
  std::map<Point, std::vector<Point>> succ;
  std::vector<Point> oracle_draws;
  std::optional<Point> cur;
  for (int step = 0; step < 400; ++step) {
    if (cur) {
      // Next-state law integrated over the next oracle draw.
      const auto& past = succ[*cur];
      const double nx = static_cast<double>(past.size());
      const double m = static_cast<double>(oracle_draws.size());
      const auto pred = ihmm_predict(s);
      std::set<Point> candidates(past.begin(), past.end());
      candidates.insert(oracle_draws.begin(), oracle_draws.end());
      double total = 0.0;
      for (const auto& y : candidates) {
        const double t = static_cast<double>(std::count(past.begin(), past.end(), y));
        const double my = static_cast<double>(std::count(oracle_draws.begin(), oracle_draws.end(), y));
        const double expect = (t + alpha * my / (gamma + m)) / (alpha + nx);
        REQUIRE_THAT(pred.mass(y), WithinAbs(expect, 1e-12));
        total += expect;
      }
      REQUIRE_THAT(pred.diffuse_weight(), WithinAbs(alpha * gamma / ((gamma + m) * (alpha + nx)), 1e-12));
      REQUIRE_THAT(total + pred.diffuse_weight(), WithinAbs(1.0, 1e-12));
    }
    auto d = ihmm_next(std::move(s), rng);
    s = std::move(d.state);
    if (d.from_oracle) {
      oracle_draws.push_back(d.next);
    } else {
      REQUIRE(cur);
      // A non-oracle step repeats an earlier successor of the current state.
      const auto& past = succ[*cur];
      REQUIRE(std::find(past.begin(), past.end(), d.next) != past.end());
    }
    if (cur) succ[*cur].push_back(d.next);
    cur = d.next;
  }
  REQUIRE(s.oracle.draws == oracle_draws);
  for (const auto& [x, v] : succ) REQUIRE(s.urns.at(x) == v);
}

TEST_CASE("pcid with a heavy single weight", "[structured-rules]") {
  const PcidSequenceState s{1.0, BaseMeasure::uniform_labels(2), {lab(1)}, {3.0}};
  REQUIRE_THAT(pcid_predict(s).mass(lab(1)), WithinAbs(0.875, 1e-15));
  const PcidSequenceState bad{1.0, BaseMeasure::uniform_labels(2), {lab(1)}, {0.0}};
  REQUIRE_THROWS_AS(pcid_predict(bad), ConfigError);
}

TEST_CASE("pcid with unit weights is bit-identical to Pólya", "[structured-rules]") {
  const auto base = BaseMeasure::uniform(0.0, 1.0);
  const PolyaRule polya(1.7, base);
  RandomSource rng(13);
  const auto path = simulate_chain(polya, 200, rng);
  PcidSequenceState s{1.7, base, {}, {}};
  auto ps = polya.initial_state();
  for (const auto& x : path.observations) {
    s.xs.push_back(x);
    s.weights.push_back(1.0);
    ps = polya.update(std::move(ps), x);
    const auto a = pcid_predict(s);
    const auto b = polya.predict(ps);
    REQUIRE(a.diffuse_weight() == b.diffuse_weight());
    REQUIRE(a.atoms().size() == b.atoms().size());
    for (std::size_t i = 0; i < a.atoms().size(); ++i) {
      REQUIRE(a.atoms()[i].first == b.atoms()[i].first);
      REQUIRE(a.atoms()[i].second == b.atoms()[i].second);
    }
  }
}

TEST_CASE("pcid predictive is a martingale with independent weights", "[structured-rules]") {
  // W_{n+1} in {0.5, 2} with probabilities {0.3, 0.7}, independent of X_{n+1}.
  const std::vector<double> ws{0.5, 2.0}, pw{0.3, 0.7};
  const auto base = BaseMeasure::discrete(DiscreteDistribution({lab(0), lab(1)}, {0.4, 0.6}));
  const PcidSequenceState s{1.2, base, {lab(1), lab(0), lab(1)}, {2.0, 0.5, 0.5}};
  const double now = pcid_predict(s).mass(lab(1));
  const auto expected_next = [&](auto weight_of) {
    double e = 0.0;
    for (int x = 0; x < 2; ++x)
      for (std::size_t k = 0; k < ws.size(); ++k) {
        auto t = s;
        t.xs.push_back(lab(x));
        t.weights.push_back(weight_of(x, k));
        e += pcid_predict(s).mass(lab(x)) * pw[k] * pcid_predict(t).mass(lab(1));
      }
    return e;
  };
  REQUIRE_THAT(expected_next([&](int, std::size_t k) { return ws[k]; }), WithinAbs(now, 1e-15));
  // A weight that looks at X_{n+1} breaks the identity.
  const double dependent = expected_next([](int x, std::size_t) { return x == 1 ? 3.0 : 1.0; });
  REQUIRE(std::fabs(dependent - now) > 1e-3);
}

TEST_CASE("pcid rule draws rows column by column", "[structured-rules]") {
  const PcidRule rule({1.0, 2.0}, {BaseMeasure::uniform_labels(2), BaseMeasure::uniform_labels(3)});
  RandomSource rng(14);
  auto s = rule.initial_state();
  for (int i = 0; i < 50; ++i) {
    const auto row = rule.draw(s, rng);
    REQUIRE(row.size() == 2);
    REQUIRE_THAT(rule.row_mass(s, row), WithinAbs(rule.column_mass(s, 0, row[0]) * rule.column_mass(s, 1, row[1]),
                                                   1e-15));
    s = rule.update(std::move(s), row);
  }
  REQUIRE(s.n == 50);
  REQUIRE_THROWS_AS(rule.update(s, Row{lab(0)}), ConfigError);
  REQUIRE_THROWS_AS(PcidRule({1.0}, {}), ConfigError);
}

TEST_CASE("graphon constant edge counts", "[structured-rules]") {
  const double p = 0.3;
  const std::size_t n = 12;
  const int reps = 2000;
  const auto w = Graphon::constant(p);
  RandomSource root(15);
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    RandomSource rng = root.branch(static_cast<std::uint64_t>(r));
    sum += static_cast<double>(graphon_sample(w, n, GraphonMode::joint, rng).ones()) / 2.0;
  }
  const double pairs = static_cast<double>(n * (n - 1)) / 2.0;
  const double mean = sum / reps;
  const double sigma = std::sqrt(pairs * p * (1 - p) / reps);
  REQUIRE(std::fabs(mean - pairs * p) < 3.0 * sigma);
}

TEST_CASE("graphon zero gives the zero array", "[structured-rules]") {
  RandomSource rng(16);
  for (auto mode : {GraphonMode::separate, GraphonMode::joint})
    REQUIRE(graphon_sample(Graphon::constant(0.0), 15, mode, rng).ones() == 0);
}

TEST_CASE("graphon joint arrays are symmetric with zero diagonal", "[structured-rules]") {
  const Graphon w([](double u, double v) { return u * v; }, true);
  RandomSource rng(17);
  for (int r = 0; r < 20; ++r) {
    const auto x = graphon_sample(w, 25, GraphonMode::joint, rng);
    for (std::size_t i = 0; i < 25; ++i) {
      REQUIRE(x(i, i) == 0);
      for (std::size_t j = 0; j < 25; ++j) REQUIRE(x(i, j) == x(j, i));
    }
  }
}

TEST_CASE("graphon validation", "[structured-rules]") {
  const Graphon skew([](double u, double) { return u; }, false);
  RandomSource rng(18);
  REQUIRE_THROWS_AS(graphon_sample(skew, 5, GraphonMode::joint, rng), ConfigError);
  REQUIRE_NOTHROW(graphon_sample(skew, 5, GraphonMode::separate, rng));
  REQUIRE_THROWS_AS(Graphon([](double u, double v) { return u + v; }, true), ConfigError);
  REQUIRE_THROWS_AS(Graphon([](double u, double) { return u; }, true), ConfigError);
  REQUIRE_THROWS_AS(Graphon::constant(1.5), ConfigError);
}

TEST_CASE("graphon separate arrays are row exchangeable", "[structured-rules]") {
  // Degree of row 0 in even replicates against degree of row 17 in odd ones.
  const Graphon w([](double u, double v) { return u * v; }, false);
  const std::size_t n = 30;
  const int reps = 1000;
  std::vector<double> h0(n + 1, 0.0), h1(n + 1, 0.0);
  RandomSource root(19);
  for (int r = 0; r < 2 * reps; ++r) {
    RandomSource rng = root.branch(static_cast<std::uint64_t>(r));
    const auto x = graphon_sample(w, n, GraphonMode::separate, rng);
    const std::size_t row = r % 2 == 0 ? 0 : 17;
    std::size_t deg = 0;
    for (std::size_t j = 0; j < n; ++j) deg += x(row, j);
    (r % 2 == 0 ? h0 : h1)[deg] += 1.0;
  }
  // Pool sparse tails so every bin has a healthy expected count.
  std::vector<double> a, b;
  double acc_a = 0.0, acc_b = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    acc_a += h0[k];
    acc_b += h1[k];
    if (acc_a + acc_b >= 40.0 || k == n) {
      a.push_back(acc_a);
      b.push_back(acc_b);
      acc_a = acc_b = 0.0;
    }
  }
  if (a.size() > 1 && a.back() + b.back() < 40.0) {
    a[a.size() - 2] += a.back();
    b[b.size() - 2] += b.back();
    a.pop_back();
    b.pop_back();
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = (a[i] + b[i]) / 2.0;
    chi2 += (a[i] - e) * (a[i] - e) / e + (b[i] - e) * (b[i] - e) / e;
  }
  REQUIRE(chi2 < oracle::chi2_quantile(static_cast<double>(a.size() - 1), 0.99));
}
