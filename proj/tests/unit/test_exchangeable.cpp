#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "predictive/predictive.hpp"

using namespace predictive;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Point lab(std::int64_t i) { return Point{Label{i}}; }

std::vector<Point> labels_of(const std::vector<int>& xs) {
  std::vector<Point> out;
  for (int x : xs) out.push_back(lab(x));
  return out;
}

// All sequences over {0..k-1} of length n.
std::vector<std::vector<int>> all_sequences(int k, int n) {
  std::vector<std::vector<int>> out{{}};
  for (int i = 0; i < n; ++i) {
    std::vector<std::vector<int>> next;
    for (const auto& s : out)
      for (int x = 0; x < k; ++x) {
        auto t = s;
        t.push_back(x);
        next.push_back(t);
      }
    out = std::move(next);
  }
  return out;
}

double block_weight(const AtomicMixture& m, const Point& x) { return m.mass(x); }

}  // namespace

TEST_CASE("polya predictive with no data is the base", "[exchangeable-rules]") {
  const PolyaRule rule(2.0, BaseMeasure::uniform(0.0, 1.0));
  const auto p = rule.predict(rule.initial_state());
  REQUIRE(p.atoms().empty());
  REQUIRE(p.diffuse_weight() == 1.0);
  REQUIRE(p.base() == BaseMeasure::uniform(0.0, 1.0));
}

TEST_CASE("polya binary example", "[exchangeable-rules]") {
  const PolyaRule rule(1.0, BaseMeasure::uniform_labels(2));
  const auto s = condition(rule, labels_of({1}));
  REQUIRE_THAT(rule.mass(s, lab(1)), WithinAbs(0.75, 1e-15));
  REQUIRE_THAT(rule.predict(s).mass(lab(1)), WithinAbs(0.75, 1e-15));
}

TEST_CASE("polya matches the conjugate Dirichlet oracle", "[exchangeable-rules]") {
  const std::vector<double> p0{0.2, 0.3, 0.5};
  const auto base = BaseMeasure::discrete(DiscreteDistribution({lab(0), lab(1), lab(2)}, p0));
  const PolyaRule rule(2.0, base);
  for (int n = 0; n <= 4; ++n)
    for (const auto& seq : all_sequences(3, n)) {
      const auto s = condition(rule, labels_of(seq));
      const auto pred = rule.predict(s);
      const auto expect = oracle::dirichlet_predictive(2.0, p0, seq);
      for (int j = 0; j < 3; ++j) {
        REQUIRE_THAT(rule.mass(s, lab(j)), WithinAbs(expect[j], 1e-15));
        REQUIRE_THAT(pred.mass(lab(j)), WithinAbs(expect[j], 1e-15));
      }
    }
}

TEST_CASE("polya state invariants", "[exchangeable-rules]") {
  const PolyaRule rule(1.5, BaseMeasure::normal(0.0, 1.0));
  RandomSource rng(11);
  auto s = rule.initial_state();
  s = run_forward(rule, std::move(s), 200, rng, [](const PolyaState&, const Point&) {});
  REQUIRE(s.n == 200);
  REQUIRE(s.draws.size() == 200);
  const auto p = rule.predict(s);
  double total = p.diffuse_weight();
  for (const auto& [x, w] : p.atoms()) {
    REQUIRE_THAT(w, WithinAbs(static_cast<double>(s.multiplicity(x)) / 201.5, 1e-15));
    total += w;
  }
  REQUIRE_THAT(p.diffuse_weight(), WithinAbs(1.5 / 201.5, 1e-15));
  REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
  REQUIRE_THROWS_AS(PolyaRule(0.0, BaseMeasure::uniform(0.0, 1.0)), ConfigError);
}

TEST_CASE("polya joint law is permutation invariant", "[exchangeable-rules]") {
  for (int k : {2, 3}) {
    const PolyaRule rule(1.3, BaseMeasure::uniform_labels(k));
    std::vector<double> p0(static_cast<std::size_t>(k), 1.0 / k);
    for (int n = 1; n <= 4; ++n)
      for (auto seq : all_sequences(k, n)) {
        const double ref = joint_prob(rule, labels_of(seq));
        REQUIRE_THAT(ref, WithinRel(oracle::dirichlet_sequence_prob(1.3, p0, seq), 1e-12));
        std::sort(seq.begin(), seq.end());
        do {
          REQUIRE_THAT(joint_prob(rule, labels_of(seq)), WithinAbs(ref, 1e-12));
        } while (std::next_permutation(seq.begin(), seq.end()));
      }
  }
}

TEST_CASE("polya cdf tracker agrees with direct evaluation", "[exchangeable-rules]") {
  const PolyaRule rule(2.0, BaseMeasure::uniform(0.0, 1.0));
  const std::vector<double> grid{0.1, 0.5, 0.9};
  RandomSource rng(5);
  const auto path = simulate_chain(rule, 300, rng, grid);
  auto s = rule.initial_state();
  for (std::size_t m = 0; m <= 300; ++m) {
    for (std::size_t j = 0; j < grid.size(); ++j)
      REQUIRE_THAT(path.snapshots[m][j], WithinAbs(rule.cdf(s, grid[j]), 1e-14));
    if (m < 300) s = rule.update(std::move(s), path.observations[m]);
  }
}

TEST_CASE("crp eppf examples", "[exchangeable-rules]") {
  for (double alpha : {0.3, 1.0, 7.0}) REQUIRE_THAT(eppf_crp(PartitionCounts({1}), alpha), WithinAbs(1.0, 1e-15));
  REQUIRE_THAT(eppf_crp(PartitionCounts({2}), 1.0), WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(eppf_crp(PartitionCounts({2, 1}), 1.0), WithinAbs(1.0 / 6.0, 1e-15));
  REQUIRE_THROWS_AS(eppf_crp(PartitionCounts{}, 1.0), DomainError);
  REQUIRE_THROWS_AS(eppf_crp(PartitionCounts({1}), 0.0), ConfigError);
  REQUIRE_THROWS_AS(PartitionCounts({2, 0}), ConfigError);
}

TEST_CASE("crp eppf does not overflow for long sequences", "[exchangeable-rules]") {
  const double lp = log_eppf_crp(PartitionCounts({300, 200, 100}), 2.0);
  REQUIRE(std::isfinite(lp));
  const double expect = 3.0 * std::log(2.0) - (std::lgamma(602.0) - std::lgamma(2.0)) + std::lgamma(300.0) +
                        std::lgamma(200.0) + std::lgamma(100.0);
  REQUIRE_THAT(lp, WithinRel(expect, 1e-12));
}

TEST_CASE("eppf total mass over all set partitions", "[exchangeable-rules]") {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto parts = oracle::set_partitions(n);
    REQUIRE(parts.size() == oracle::bell(n));
    double crp = 0.0, py = 0.0, fd = 0.0;
    for (const auto& sizes : parts) {
      crp += eppf_crp(PartitionCounts(sizes), 1.7);
      py += eppf_py(PartitionCounts(sizes), 0.8, 0.4);
      fd += eppf_finite_dirichlet(PartitionCounts(sizes), 2.0, 3);
    }
    REQUIRE_THAT(crp, WithinAbs(1.0, 1e-10));
    REQUIRE_THAT(py, WithinAbs(1.0, 1e-10));
    REQUIRE_THAT(fd, WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("eppf equals sequential allocation products", "[exchangeable-rules]") {
  // Every labeling of 5 customers, visited in its own order.
  const int n = 5;
  for (const auto& seq : all_sequences(n, n)) {
    std::vector<std::size_t> labels(seq.begin(), seq.end());
    std::map<std::size_t, std::size_t> sizes_by_label;
    std::vector<std::size_t> order;
    for (auto l : labels)
      if (sizes_by_label[l]++ == 0) order.push_back(l);
    std::vector<std::size_t> sizes;
    for (auto l : order) sizes.push_back(sizes_by_label[l]);
    const PartitionCounts c(sizes);
    REQUIRE_THAT(eppf_py(c, 1.2, 0.3), WithinRel(oracle::py_sequential_labels(labels, 1.2, 0.3), 1e-12));
    REQUIRE_THAT(eppf_crp(c, 0.9), WithinRel(oracle::py_sequential_labels(labels, 0.9, 0.0), 1e-12));
    REQUIRE_THAT(eppf_py(c, 1.2, 0.3), WithinRel(oracle::py_sequential(sizes, 1.2, 0.3), 1e-12));
  }
}

TEST_CASE("species_predict with the crp eppf", "[exchangeable-rules]") {
  const PartitionCounts c({3, 1, 2});
  const std::vector<Point> atoms{Point{0.1}, Point{0.4}, Point{0.7}};
  const double alpha = 1.5;
  const auto p = species_predict(c, atoms, crp_eppf(alpha), BaseMeasure::uniform(0.0, 1.0));
  for (std::size_t j = 0; j < 3; ++j)
    REQUIRE_THAT(block_weight(p, atoms[j]), WithinAbs(static_cast<double>(c[j]) / (alpha + 6.0), 1e-12));
  REQUIRE_THAT(p.diffuse_weight(), WithinAbs(alpha / (alpha + 6.0), 1e-12));
}

TEST_CASE("species_predict with the finite Dirichlet eppf", "[exchangeable-rules]") {
  const double alpha = 2.0;
  const std::size_t K = 4;
  for (const auto& sizes : std::vector<std::vector<std::size_t>>{{1}, {2, 1}, {1, 1, 3}, {2, 2, 1, 1}}) {
    const PartitionCounts c(sizes);
    std::vector<Point> atoms;
    for (std::size_t j = 0; j < sizes.size(); ++j) atoms.push_back(Point{0.1 * static_cast<double>(j + 1)});
    const auto p = species_predict(c, atoms, finite_dirichlet_eppf(alpha, K), BaseMeasure::uniform(0.0, 1.0));
    const double n = static_cast<double>(c.n());
    double total = p.diffuse_weight();
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      const double w = block_weight(p, atoms[j]);
      REQUIRE_THAT(w, WithinAbs((static_cast<double>(sizes[j]) + alpha / K) / (alpha + n), 1e-12));
      total += w;
    }
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
    const auto direct = finite_dirichlet_weights(c, alpha, K);
    REQUIRE_THAT(p.diffuse_weight(), WithinAbs(direct.fresh, 1e-12));
  }
}

TEST_CASE("species_predict with empty counts is the base", "[exchangeable-rules]") {
  const auto p = species_predict(PartitionCounts{}, {}, crp_eppf(1.0), BaseMeasure::normal(0.0, 1.0));
  REQUIRE(p.diffuse_weight() == 1.0);
  REQUIRE(p.atoms().empty());
}

TEST_CASE("species_predict refuses null conditioning and bad eppfs", "[exchangeable-rules]") {
  const auto base = BaseMeasure::uniform(0.0, 1.0);
  // K=1 forbids a second block, so p(1,1) = 0.
  REQUIRE_THROWS_AS(species_predict(PartitionCounts({1, 1}), {Point{0.1}, Point{0.2}},
                                    finite_dirichlet_eppf(1.0, 1), base),
                    ConditioningOnNull);
  const EppfSpec broken{"broken", [](const PartitionCounts& c) { return c.n() == 1 ? 1.0 : 0.4; }};
  REQUIRE_THROWS_AS(species_predict(PartitionCounts({1}), {Point{0.1}}, broken, base), ConfigError);
  REQUIRE_THROWS_AS(species_predict(PartitionCounts({1}), {}, crp_eppf(1.0), base), ConfigError);
}

TEST_CASE("pitman-yor weight examples", "[exchangeable-rules]") {
  const PartitionCounts c({4, 1, 2});
  const auto py = py_weights(c, 1.3, 0.0);
  const auto crp = crp_weights(c, 1.3);
  for (std::size_t j = 0; j < 3; ++j) {
    REQUIRE_THAT(py.existing[j], WithinAbs(static_cast<double>(c[j]) / 8.3, 1e-15));
    REQUIRE(py.existing[j] == crp.existing[j]);
  }
  REQUIRE_THAT(py.fresh, WithinAbs(1.3 / 8.3, 1e-15));

  const auto w = py_weights(PartitionCounts({1}), 1.0, 0.5);
  REQUIRE_THAT(w.existing[0], WithinAbs(0.25, 1e-15));
  REQUIRE_THAT(w.fresh, WithinAbs(0.75, 1e-15));
}

TEST_CASE("pitman-yor parameter domain", "[exchangeable-rules]") {
  REQUIRE_THROWS_AS(py_weights(PartitionCounts({1}), 1.0, 1.0), ConfigError);
  REQUIRE_THROWS_AS(py_weights(PartitionCounts({1}), 1.0, -0.1), ConfigError);
  REQUIRE_THROWS_AS(py_weights(PartitionCounts({1}), -0.5, 0.5), ConfigError);
  // alpha <= 0 is allowed as long as alpha > -theta.
  const auto w = py_weights(PartitionCounts({2, 1}), -0.2, 0.5);
  REQUIRE_THAT(w.fresh, WithinAbs((-0.2 + 2 * 0.5) / 2.8, 1e-15));
  REQUIRE(w.existing[1] >= 0.0);
}

TEST_CASE("pitman-yor weights sum to one", "[exchangeable-rules]") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> blocks(1, 8), size(1, 20);
  for (int i = 0; i < 1000; ++i) {
    const double theta = 0.999 * unif(gen);
    const double alpha = -theta + 1e-6 + 10.0 * unif(gen);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(blocks(gen)));
    for (auto& s : sizes) s = static_cast<std::size_t>(size(gen));
    const auto w = py_weights(PartitionCounts(sizes), alpha, theta);
    double total = w.fresh;
    for (double p : w.existing) {
      REQUIRE(p >= 0.0);
      total += p;
    }
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("eppf weights agree with closed-form weights", "[exchangeable-rules]") {
  for (const auto& sizes : std::vector<std::vector<std::size_t>>{{1}, {3, 1}, {2, 5, 1}, {1, 1, 1, 1}}) {
    const PartitionCounts c(sizes);
    const auto a = eppf_weights(pitman_yor_eppf(2.0, 0.25), c);
    const auto b = py_weights(c, 2.0, 0.25);
    for (std::size_t j = 0; j < sizes.size(); ++j) REQUIRE_THAT(a.existing[j], WithinAbs(b.existing[j], 1e-12));
    REQUIRE_THAT(a.fresh, WithinAbs(b.fresh, 1e-12));
  }
}

TEST_CASE("species rule is exchangeable on partitions", "[exchangeable-rules]") {
  // Probability of a tie pattern under the sequential rule equals the eppf.
  const SpeciesRule rule(PitmanYorPolicy{1.1, 0.3}, BaseMeasure::uniform(0.0, 1.0));
  auto s = rule.initial_state();
  const std::vector<Point> xs{Point{0.2}, Point{0.2}, Point{0.6}, Point{0.2}, Point{0.9}, Point{0.6}};
  double p = 1.0;
  for (const auto& x : xs) {
    const auto pred = rule.predict(s);
    const double m = pred.mass(x);
    p *= m > 0.0 ? m : pred.diffuse_weight();
    s = rule.update(std::move(s), x);
  }
  REQUIRE(s.counts == PartitionCounts({3, 2, 1}));
  REQUIRE_THAT(p, WithinRel(eppf_py(s.counts, 1.1, 0.3), 1e-12));
  REQUIRE_THROWS_AS(SpeciesRule(CrpPolicy{1.0}, BaseMeasure::uniform_labels(3)), ConfigError);
}

TEST_CASE("kernel dirichlet with point-mass kernel is polya", "[exchangeable-rules]") {
  const auto base = BaseMeasure::uniform(0.0, 1.0);
  const PolyaRule polya(2.5, base);
  const KernelDirichletRule kds(2.5, base, [](const Point& x) { return AtomicMixture::point_mass(x); });
  RandomSource rng(8);
  const auto path = simulate_chain(polya, 50, rng);
  auto s = condition(polya, path.observations);
  const auto a = polya.predict(s);
  const auto b = kernel_ds_predict(s, [](const Point& x) { return AtomicMixture::point_mass(x); });
  REQUIRE(a.diffuse_weight() == b.diffuse_weight());
  for (const auto& [x, w] : a.atoms()) REQUIRE_THAT(b.mass(x), WithinAbs(w, 1e-15));
  for (double t : {0.0, 0.2, 0.5, 0.8, 1.0})
    REQUIRE_THAT(eval_cdf(kds.predict(s), t), WithinAbs(eval_cdf(a, t), 1e-14));
}

TEST_CASE("kernel dirichlet with no data is the base", "[exchangeable-rules]") {
  const PolyaState s{1.0, BaseMeasure::normal(0.0, 1.0), 0, {}};
  const auto p = kernel_ds_predict(s, [](const Point& x) { return AtomicMixture::point_mass(x); });
  REQUIRE(p.diffuse_weight() == 1.0);
  REQUIRE(p.base() == BaseMeasure::normal(0.0, 1.0));
}

TEST_CASE("kernel dirichlet with a smoothing matrix", "[exchangeable-rules]") {
  // K(.|x) keeps x with probability 0.8 and flips it otherwise.
  const double K[2][2] = {{0.8, 0.2}, {0.2, 0.8}};
  const double alpha = 1.5;
  const std::vector<double> p0{0.3, 0.7};
  const auto base = BaseMeasure::discrete(DiscreteDistribution({lab(0), lab(1)}, p0));
  const ProbabilityKernel kernel = [&K](const Point& x) {
    const auto i = std::get<Label>(x).value;
    return AtomicMixture({{lab(0), K[i][0]}, {lab(1), K[i][1]}}, 0.0);
  };
  const KernelDirichletRule rule(alpha, base, kernel);
  for (int n = 0; n <= 4; ++n)
    for (const auto& seq : all_sequences(2, n)) {
      const auto s = condition(rule, labels_of(seq));
      const auto pred = rule.predict(s);
      for (int y = 0; y < 2; ++y) {
        double expect = alpha * p0[static_cast<std::size_t>(y)];
        for (int x : seq) expect += K[x][y];
        expect /= alpha + n;
        REQUIRE_THAT(pred.mass(lab(y)), WithinAbs(expect, 1e-12));
      }
    }
}

TEST_CASE("kernel dirichlet rejects unnormalized kernels", "[exchangeable-rules]") {
  const PolyaState s{1.0, BaseMeasure::uniform_labels(2), 1, {lab(0)}};
  REQUIRE_THROWS_AS(kernel_ds_predict(s, [](const Point&) { return AtomicMixture({{lab(0), 0.6}}, 0.0); }),
                    Error);
}

TEST_CASE("ibp first customer takes a Poisson number of dishes", "[exchangeable-rules]") {
  const double theta = 2.5;
  const int reps = 10000;
  RandomSource root(21);
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    RandomSource rng = root.branch(static_cast<std::uint64_t>(r));
    const auto step = ibp_next(make_ibp(theta), rng);
    REQUIRE(step.dishes.size() == step.new_dishes);
    total += static_cast<double>(step.new_dishes);
  }
  REQUIRE(std::fabs(total / reps - theta) < 3.0 * std::sqrt(theta / reps));
}

TEST_CASE("ibp popular dish is taken with probability n/(n+1)", "[exchangeable-rules]") {
  IbpState s = make_ibp(1.0);
  s.n = 4;
  s.dish_counts = {{0, 4}, {1, 1}};
  s.dishes_created = 2;
  RandomSource rng(3);
  const int reps = 20000;
  int popular = 0, rare = 0;
  for (int r = 0; r < reps; ++r) {
    const auto step = ibp_next(s, rng);
    popular += std::count(step.dishes.begin(), step.dishes.end(), 0u) > 0 ? 1 : 0;
    rare += std::count(step.dishes.begin(), step.dishes.end(), 1u) > 0 ? 1 : 0;
  }
  const auto within = [reps](int hits, double p) {
    return std::fabs(hits / static_cast<double>(reps) - p) < 4.0 * std::sqrt(p * (1 - p) / reps);
  };
  REQUIRE(within(popular, 0.8));
  REQUIRE(within(rare, 0.2));
}

TEST_CASE("ibp dish count grows harmonically", "[exchangeable-rules]") {
  const double theta = 1.5;
  const std::size_t n = 20;
  const int reps = 4000;
  double harmonic = 0.0;
  for (std::size_t i = 1; i <= n; ++i) harmonic += 1.0 / static_cast<double>(i);
  RandomSource root(99);
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    RandomSource rng = root.branch(static_cast<std::uint64_t>(r));
    IbpState s = make_ibp(theta);
    for (std::size_t i = 0; i < n; ++i) {
      auto step = ibp_next(std::move(s), rng);
      s = std::move(step.state);
    }
    std::set<std::uint64_t> ids;
    for (const auto& [id, k] : s.dish_counts) {
      REQUIRE(k >= 1);
      REQUIRE(k <= n);
      ids.insert(id);
    }
    REQUIRE(ids.size() == s.dish_counts.size());
    REQUIRE(s.dishes_created == s.dish_counts.size());
    const auto d = static_cast<double>(s.dish_counts.size());
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  REQUIRE(std::fabs(mean - theta * harmonic) < 3.0 * se);
  REQUIRE_THROWS_AS(make_ibp(0.0), ConfigError);
}
