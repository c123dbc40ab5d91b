#include <algorithm>
#include <cmath>
#include <iostream>

#include <boost/math/special_functions/beta.hpp>

#include "commands.hpp"

namespace predictive::cli {

namespace {

std::string csv_header(const char* first, const std::vector<double>& grid) {
  std::string h = first;
  for (double t : grid) h += ",t=" + format_double(t);
  return h + "\n";
}

/// P_0 as point masses on a finite support, else the base description.
template <class R>
Json initial_law(const R& rule, const RuleOptions& o) {
  if constexpr (MassRule<R>) {
    if (const auto support = rule.support()) {
      const auto s0 = rule.initial_state();
      Json masses = Json::array();
      for (const auto& x : *support) masses.push_back(Json{{"x", x}, {"mass", rule.mass(s0, x)}});
      return masses;
    }
  }
  return o.rule == "newton" ? rule_json(o)["g0"] : Json(parse_base(o.base).describe());
}

void simulate_ibp(const Common& c, const SimulateOptions& o) {
  RandomSource rng(c.seed);
  auto s = make_ibp(o.rule.alpha);
  std::string csv = "customer,dish,new\n";
  for (std::size_t m = 0; m < o.steps; ++m) {
    auto step = ibp_next(std::move(s), rng);
    const std::size_t old = step.dishes.size() - step.new_dishes;
    for (std::size_t i = 0; i < step.dishes.size(); ++i)
      csv += std::to_string(m + 1) + "," + std::to_string(step.dishes[i]) + "," + (i >= old ? "1" : "0") + "\n";
    s = std::move(step.state);
  }
  write_file(c.out("chain.csv"), csv);
  Json meta = report_header("simulate", c);
  meta["rule"] = Json{{"rule", "ibp"}, {"theta", o.rule.alpha}};
  meta["steps"] = o.steps;
  meta["dishes"] = s.dishes_created;
  write_json(c.out("metadata.json"), meta);
}

void simulate_franchise(const Common& c, const SimulateOptions& o) {
  RandomSource rng(c.seed);
  const auto alphas = parse_list(o.restaurants, "restaurants");
  auto s = make_franchise(alphas, o.gamma, parse_base(o.rule.base));
  std::string csv = "restaurant,table,new_table,x\n";
  for (std::size_t m = 0; m < o.steps; ++m) {
    const std::size_t j = m % alphas.size();
    auto d = franchise_next(std::move(s), j, rng);
    csv += std::to_string(j) + "," + std::to_string(d.table) + "," + (d.new_table ? "1" : "0") + "," +
           format_point(d.color) + "\n";
    s = std::move(d.state);
  }
  write_file(c.out("chain.csv"), csv);
  Json meta = report_header("simulate", c);
  meta["rule"] = Json{{"rule", "franchise"}, {"restaurants", alphas}, {"gamma", o.gamma},
                      {"base", parse_base(o.rule.base).describe()}};
  meta["steps"] = o.steps;
  meta["dishes"] = s.oracle.draws.size();
  write_json(c.out("metadata.json"), meta);
}

void simulate_ihmm(const Common& c, const SimulateOptions& o) {
  RandomSource rng(c.seed);
  auto s = make_ihmm(o.rule.alpha, o.gamma, parse_base(o.rule.base));
  std::string csv = "x,from_oracle\n";
  for (std::size_t m = 0; m < o.steps; ++m) {
    auto d = ihmm_next(std::move(s), rng);
    csv += format_point(d.next) + "," + (d.from_oracle ? "1" : "0") + "\n";
    s = std::move(d.state);
  }
  write_file(c.out("chain.csv"), csv);
  Json meta = report_header("simulate", c);
  meta["rule"] = Json{{"rule", "ihmm"}, {"alpha", o.rule.alpha}, {"gamma", o.gamma},
                      {"base", parse_base(o.rule.base).describe()}};
  meta["steps"] = o.steps;
  meta["states"] = s.urns.size();
  write_json(c.out("metadata.json"), meta);
}

struct ColumnSummary {
  double mean = 0.0, sd = 0.0, se = 0.0, min = 0.0, max = 0.0;
};

ColumnSummary summarize(const std::vector<double>& xs) {
  ColumnSummary s;
  const double m = static_cast<double>(xs.size());
  s.mean = compensated_sum(xs) / m;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = xs.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
  s.se = s.sd / std::sqrt(m);
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  return s;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous cdf.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf&& cdf) {
  std::sort(xs.begin(), xs.end());
  const double m = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

template <ScalarRule R>
void resample_with(const Common& c, const ResampleOptions& o, const R& rule, const std::vector<Point>& data) {
  ResamplingPlan plan;
  plan.horizon = o.horizon;
  plan.replicates = o.replicates;
  plan.grid = parse_list(o.grid, "grid");
  plan.seed = c.seed;
  plan.workers = c.workers;
  if (o.estimator == "predictive")
    plan.estimator = TerminalEstimator::predictive;
  else if (o.estimator == "empirical")
    plan.estimator = TerminalEstimator::empirical;
  else
    throw ConfigError("unknown estimator '" + o.estimator + "' (expected predictive|empirical)");

  const auto sample = sample_posterior(rule, data, plan);
  const auto conditioned = condition(rule, data);

  std::string csv = csv_header("replicate", sample.grid);
  for (std::size_t r = 0; r < sample.replicates; ++r) {
    csv += std::to_string(r);
    for (std::size_t j = 0; j < sample.columns; ++j) csv += "," + format_double(sample(r, j));
    csv += "\n";
  }
  write_file(c.out("sample.csv"), csv);

  Json columns = Json::array();
  for (std::size_t j = 0; j < sample.columns; ++j) {
    const auto col = sample.column(j);
    const auto s = summarize(col);
    const double pn = rule.cdf(conditioned, sample.grid[j]);
    Json entry{{"t", sample.grid[j]}, {"mean", s.mean}, {"sd", s.sd}, {"se", s.se}, {"min", s.min},
               {"max", s.max}, {"predictive", pn}};
    if constexpr (std::is_same_v<R, PolyaRule>) {
      // F(t) is Beta(alpha P_0(t) + #{x <= t}, alpha (1 - P_0(t)) + #{x > t}) under the Dirichlet process.
      std::size_t below = 0;
      for (const auto& x : data)
        if (scalar_value(x) <= sample.grid[j]) ++below;
      const double p0 = rule.base().cdf(sample.grid[j]);
      const double a = rule.alpha() * p0 + static_cast<double>(below);
      const double b = rule.alpha() * (1.0 - p0) + static_cast<double>(data.size() - below);
      if (a > 0.0 && b > 0.0)
        entry["beta_oracle"] = Json{{"a", a}, {"b", b},
                                    {"ks", ks_distance(col, [&](double x) { return boost::math::ibeta(a, b, x); })}};
      else
        entry["beta_oracle"] = Json{{"a", a}, {"b", b}, {"ks", nullptr}, {"note", "degenerate limit"}};
    }
    columns.push_back(std::move(entry));
  }

  Json report = report_header("resample", c);
  report["rule"] = rule_json(o.rule);
  report["mode"] = data.empty() ? "prior" : "posterior";
  report["observed"] = sample.observed;
  report["horizon"] = sample.horizon;
  report["replicates"] = sample.replicates;
  report["grid"] = sample.grid;
  report["estimator"] = o.estimator;
  report["data_digest"] = sample.data_digest;
  report["columns"] = std::move(columns);
  write_json(c.out("report.json"), report);

  if (o.histogram_bins > 0) {
    const std::size_t bins = o.histogram_bins;
    std::string h = "t,bin_lo,bin_hi,count\n";
    for (std::size_t j = 0; j < sample.columns; ++j) {
      std::vector<std::size_t> counts(bins, 0);
      for (double v : sample.column(j)) {
        const auto b = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * static_cast<double>(bins));
        ++counts[std::min(b, bins - 1)];
      }
      for (std::size_t b = 0; b < bins; ++b)
        h += format_double(sample.grid[j]) + "," + format_double(static_cast<double>(b) / static_cast<double>(bins)) +
             "," + format_double(static_cast<double>(b + 1) / static_cast<double>(bins)) + "," +
             std::to_string(counts[b]) + "\n";
    }
    write_file(c.out("histogram.csv"), h);
  }
}

template <ScalarRule R>
void credible_with(const Common& c, const CredibleOptions& o, const R& rule, const std::vector<Point>& data) {
  const auto grid = parse_list(o.grid, "grid");
  validate_grid(grid, o.rule.rule == "newton" ? BaseMeasure() : parse_base(o.rule.base));
  if (data.empty()) throw ConfigError("credible: at least one observation is required");
  if (!(o.level > 0.0 && o.level < 1.0)) throw ConfigError("credible: level must lie in (0,1)");

  auto s = rule.initial_state();
  auto tracker = make_cdf_tracker(rule, s, std::span<const double>(grid));
  auto acc = make_accumulator(tracker.values());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!rule.accepts(data[i])) throw ConfigError("observation " + std::to_string(i) + " is outside the sample space");
    s = detail::checked_update(rule, std::move(s), data[i], i + 1);
    tracker.observe(s, data[i]);
    acc = record_update(std::move(acc), tracker.values());
  }

  std::string csv = "t,center,lo,hi,v\n";
  Json intervals = Json::array();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto iv = credible_interval(acc, tracker.values()[j], j, o.level);
    csv += format_double(grid[j]) + "," + format_double(iv.center) + "," + format_double(iv.lo) + "," +
           format_double(iv.hi) + "," + format_double(iv.v) + "\n";
    Json e = iv;
    e["t"] = grid[j];
    intervals.push_back(std::move(e));
  }
  write_file(c.out("credible.csv"), csv);
  const auto g = gaussian_posterior(acc, tracker.values());
  write_json(c.out("gaussian.json"), g);

  Json report = report_header("credible", c);
  report["rule"] = rule_json(o.rule);
  report["observed"] = data.size();
  report["level"] = o.level;
  report["grid"] = grid;
  report["data_digest"] = data_digest(std::span<const Point>(data));
  report["singular"] = g.singular;
  report["intervals"] = std::move(intervals);
  write_json(c.out("report.json"), report);
}

void credible_ogd(const Common& c, const CredibleOptions& o) {
  if (o.data.empty()) throw ConfigError("credible: --data is required for the ogd rule");
  if (!(o.level > 0.0 && o.level < 1.0)) throw ConfigError("credible: level must lie in (0,1)");
  const auto data = read_examples(o.data);
  if (data.empty()) throw ConfigError("credible: at least one observation is required");
  auto s = make_ogd_model_state(o.ogd, data.front().x.size());
  for (const auto& e : data) s = ogd_update(std::move(s), e);
  const auto cred = ogd_credible(s, o.level);

  std::string csv = "coordinate,center,lo,hi,v\n";
  for (std::size_t i = 0; i < cred.intervals.size(); ++i) {
    const auto& iv = cred.intervals[i];
    csv += std::to_string(i) + "," + format_double(iv.center) + "," + format_double(iv.lo) + "," +
           format_double(iv.hi) + "," + format_double(iv.v) + "\n";
  }
  write_file(c.out("credible.csv"), csv);
  write_json(c.out("gaussian.json"), cred.approx);
  Json report = report_header("credible", c);
  report["rule"] = Json{{"rule", "ogd"}, {"loss", o.ogd.loss}, {"loss_scale", s.loss_scale}};
  report["observed"] = data.size();
  report["level"] = o.level;
  report["data_digest"] = data_digest(std::span<const LabeledExample>(data));
  report["singular"] = cred.approx.singular;
  report["intervals"] = cred.intervals;
  report["whitening"] = matrix_to_json(cred.whitening);
  write_json(c.out("report.json"), report);
}

}  // namespace

void run_simulate(const Common& c, const SimulateOptions& o) {
  if (o.rule.rule == "ibp") return simulate_ibp(c, o);
  if (o.rule.rule == "franchise") return simulate_franchise(c, o);
  if (o.rule.rule == "ihmm") return simulate_ihmm(c, o);
  const auto rule = make_rule(o.rule);
  const auto grid = parse_list(o.grid, "grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ConfigError("grid must be strictly increasing");

  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        RandomSource rng(c.seed);
        Json meta = report_header("simulate", c);
        meta["rule"] = rule_json(o.rule);
        meta["steps"] = o.steps;
        meta["p0"] = initial_law(r, o.rule);
        std::vector<Point> xs;
        if (!grid.empty()) {
          if constexpr (ScalarRule<R>) {
            const auto path = simulate_chain(r, o.steps, rng, std::span<const double>(grid));
            std::string csv = csv_header("m", grid);
            for (std::size_t m = 0; m < path.snapshots.size(); ++m)
              csv += std::to_string(m) + "," + join_doubles(path.snapshots[m]) + "\n";
            write_file(c.out("predictive.csv"), csv);
            meta["p0_on_grid"] = path.snapshots.front();
            xs = path.observations;
          } else {
            throw ConfigError("simulate: --grid needs a rule with a distribution function");
          }
        } else {
          xs = simulate_chain(r, o.steps, rng).observations;
        }
        std::string csv = "x\n";
        for (const auto& x : xs) csv += format_point(x) + "\n";
        write_file(c.out("chain.csv"), csv);
        meta["grid"] = grid;
        write_json(c.out("metadata.json"), meta);
      },
      rule);
}

void run_resample(const Common& c, const ResampleOptions& o) {
  const auto rule = make_rule(o.rule);
  const auto data = load_observations(o.data, rule, o.rule);
  with_scalar_rule(rule, "resample", [&](const auto& r) { resample_with(c, o, r, data); });
}

void run_credible(const Common& c, const CredibleOptions& o) {
  if (o.rule.rule == "ogd") return credible_ogd(c, o);
  const auto rule = make_rule(o.rule);
  const auto data = load_observations(o.data, rule, o.rule);
  with_scalar_rule(rule, "credible", [&](const auto& r) { credible_with(c, o, r, data); });
}

}  // namespace predictive::cli
