#include <algorithm>
#include <cmath>

#include "commands.hpp"

namespace predictive::cli {

namespace {

std::string theta_header(const char* first, const MixingGrid& g) {
  std::string h = first;
  for (double t : g.theta) h += ",theta=" + format_double(t);
  return h + "\n";
}

/// Evaluation points for the final predictive: the kernel support when finite,
/// else a range covering the grid.
std::vector<Point> predictive_points(const MixingGrid& g) {
  if (g.kernel.support) return *g.kernel.support;
  std::vector<Point> xs;
  const auto [lo, hi] = std::minmax_element(g.theta.begin(), g.theta.end());
  if (g.kernel.name == "poisson") {
    const auto top = static_cast<std::int64_t>(std::ceil(*hi + 6.0 * std::sqrt(*hi) + 10.0));
    for (std::int64_t v = 0; v <= top; ++v) xs.emplace_back(Label{v});
    return xs;
  }
  const double a = *lo - 4.0 * g.kernel.parameter, b = *hi + 4.0 * g.kernel.parameter;
  for (int i = 0; i <= 100; ++i) xs.emplace_back(a + (b - a) * i / 100.0);
  return xs;
}

Json grid_checkpoint(const MixingGrid& g) {
  return Json{{"theta", g.theta}, {"probs", g.probs}, {"kernel", g.kernel.describe()}, {"alpha", g.alpha},
              {"n", g.n}};
}

std::string beta_header(const char* first, std::size_t d) {
  std::string h = first;
  for (std::size_t i = 0; i < d; ++i) h += ",beta_" + std::to_string(i);
  return h + "\n";
}

/// Entrywise V_n / U; the ratio is meaningful for the cross-entropy loss.
Json plugin_comparison(const OgdState& s, const CovariateLaw& law) {
  const auto v = ogd_vn(s);
  const auto u = ogd_u_plugin(s.beta, law, s.loss_scale);
  Eigen::MatrixXd ratio = v.cwiseQuotient(u);
  return Json{{"vn", matrix_to_json(v)}, {"u_plugin", matrix_to_json(u)}, {"ratio", matrix_to_json(ratio)}};
}

bool ratio_in_band(const OgdState& s, const CovariateLaw& law) {
  const auto v = ogd_vn(s);
  const auto u = ogd_u_plugin(s.beta, law, s.loss_scale);
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      const double r = v(i, j) / u(i, j);
      if (!(r >= 0.5 && r <= 2.0)) return false;
    }
  return true;
}

void ogd_coverage(const Common& c, const OgdOptions& o) {
  const auto law = parse_covariates(o.model.covariates, o.model.covariate_probs);
  if (o.n == 0 || o.horizon <= o.n) throw ConfigError("ogd coverage: need 1 <= n < horizon");
  if (!(o.level > 0.0 && o.level < 1.0)) throw ConfigError("ogd: level must lie in (0,1)");
  const auto s0 = make_ogd_model_state(o.model, law.dim());
  const OgdRule rule(s0.beta, law, s0.loss_scale, s0.loss);
  const std::size_t d = s0.beta.size();
  const std::size_t reps = o.coverage;

  struct Outcome {
    std::vector<double> beta_n, beta_N;
    std::vector<Interval> intervals;
    bool ratio_ok = false;
  };
  std::vector<Outcome> outcomes(reps);
  const RandomSource root(c.seed);
  detail::parallel_replicates(reps, c.workers, [&](std::size_t r) {
    try {
      RandomSource rng = root.branch(r);
      auto s = run_forward(rule, rule.initial_state(), o.n, rng, [](const OgdState&, const LabeledExample&) {});
      Outcome out;
      out.beta_n = s.beta;
      out.intervals = ogd_credible(s, o.level).intervals;
      out.ratio_ok = ratio_in_band(s, law);
      s = run_forward(rule, std::move(s), o.horizon - o.n, rng, [](const OgdState&, const LabeledExample&) {});
      out.beta_N = s.beta;
      outcomes[r] = std::move(out);
    } catch (const Error&) {
      detail::annotate_replicate(r);
    }
  });

  std::string csv = "replicate";
  for (std::size_t i = 0; i < d; ++i) csv += ",beta_n_" + std::to_string(i);
  for (std::size_t i = 0; i < d; ++i) csv += ",beta_N_" + std::to_string(i);
  for (std::size_t i = 0; i < d; ++i) csv += ",covered_" + std::to_string(i);
  csv += ",ratio_in_band\n";
  std::vector<std::size_t> covered(d, 0);
  std::size_t ratio_ok = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto& out = outcomes[r];
    csv += std::to_string(r) + "," + join_doubles(out.beta_n) + "," + join_doubles(out.beta_N);
    for (std::size_t i = 0; i < d; ++i) {
      const bool in = out.intervals[i].lo <= out.beta_N[i] && out.beta_N[i] <= out.intervals[i].hi;
      covered[i] += in ? 1 : 0;
      csv += in ? ",1" : ",0";
    }
    ratio_ok += out.ratio_ok ? 1 : 0;
    csv += out.ratio_ok ? ",1\n" : ",0\n";
  }
  write_file(c.out("coverage.csv"), csv);

  Json report = report_header("ogd", c);
  report["mode"] = "coverage";
  report["replicates"] = reps;
  report["n"] = o.n;
  report["horizon"] = o.horizon;
  report["level"] = o.level;
  report["loss"] = o.model.loss;
  Json cov = Json::array();
  for (std::size_t i = 0; i < d; ++i) cov.push_back(static_cast<double>(covered[i]) / static_cast<double>(reps));
  report["coverage"] = std::move(cov);
  report["ratio_in_band_fraction"] = static_cast<double>(ratio_ok) / static_cast<double>(reps);
  write_json(c.out("report.json"), report);
}

}  // namespace

void run_newton(const Common& c, const NewtonOptions& o) {
  const NewtonRule rule(make_grid(o.rule));
  const auto kind = rule.initial_state().kernel.name == "normal" ? PointKind::real : PointKind::categorical;
  std::vector<Point> data;
  if (!o.data.empty()) {
    data = read_observations(o.data, kind);
  } else {
    RandomSource rng(c.seed);
    data = simulate_chain(rule, o.steps, rng).observations;
  }

  auto g = rule.initial_state();
  std::string traj = theta_header("n,x", g);
  traj += "0,," + join_doubles(g.probs) + "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!rule.accepts(data[i]))
      throw ConfigError("observation " + std::to_string(i) + " is outside the " + g.kernel.name + " kernel support");
    g = detail::checked_update(rule, std::move(g), data[i], i + 1);
    traj += std::to_string(i + 1) + "," + format_point(data[i]) + "," + join_doubles(g.probs) + "\n";
  }
  write_file(c.out("trajectory.csv"), traj);

  std::string pred = "x,density,cdf\n";
  for (const auto& x : predictive_points(g))
    pred += format_point(x) + "," + format_double(newton_density(g, x)) + "," +
            format_double(newton_cdf(g, scalar_value(x))) + "\n";
  write_file(c.out("predictive.csv"), pred);
  write_json(c.out("checkpoint.json"), grid_checkpoint(g));

  Json report = report_header("newton", c);
  report["rule"] = rule_json(o.rule);
  report["observed"] = data.size();
  report["data_source"] = o.data.empty() ? "simulated" : "file";
  report["data_digest"] = data_digest(std::span<const Point>(data));
  report["final"] = grid_checkpoint(g);

  if (o.replicates > 0) {
    ResamplingPlan plan;
    plan.horizon = o.horizon;
    plan.replicates = o.replicates;
    plan.seed = c.seed;
    plan.workers = c.workers;
    const auto sample =
        functional_posterior(rule, data, plan, [](const MixingGrid& terminal) { return terminal.probs; });
    std::string csv = theta_header("replicate", g);
    for (std::size_t r = 0; r < sample.replicates; ++r) {
      csv += std::to_string(r);
      for (std::size_t j = 0; j < sample.columns; ++j) csv += "," + format_double(sample(r, j));
      csv += "\n";
    }
    write_file(c.out("posterior.csv"), csv);
    Json cols = Json::array();
    for (std::size_t j = 0; j < sample.columns; ++j) {
      const auto col = sample.column(j);
      const double m = static_cast<double>(col.size());
      const double mean = compensated_sum(col) / m;
      double ss = 0.0;
      for (double v : col) ss += (v - mean) * (v - mean);
      cols.push_back(Json{{"theta", g.theta[j]}, {"mean", mean},
                          {"sd", col.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0}});
    }
    report["posterior"] = Json{{"horizon", sample.horizon}, {"replicates", sample.replicates}, {"columns", cols}};
  }
  write_json(c.out("report.json"), report);
}

void run_ogd(const Common& c, const OgdOptions& o) {
  if (o.coverage > 0) return ogd_coverage(c, o);
  if (!(o.level > 0.0 && o.level < 1.0)) throw ConfigError("ogd: level must lie in (0,1)");
  if (!o.data.empty() && o.simulate > 0) throw ConfigError("ogd: give either --data or --simulate, not both");
  if (o.data.empty() && o.simulate == 0) throw ConfigError("ogd: one of --data, --simulate or --coverage is required");

  std::optional<CovariateLaw> law;
  if (!o.model.covariates.empty()) law = parse_covariates(o.model.covariates, o.model.covariate_probs);
  std::vector<LabeledExample> data;
  if (!o.data.empty()) data = read_examples(o.data);

  OgdState s;
  if (!o.checkpoint_in.empty()) {
    try {
      s = Json::parse(read_file(o.checkpoint_in)).get<OgdState>();
    } catch (const Json::exception& e) {
      throw ConfigError(o.checkpoint_in + ": malformed checkpoint (" + e.what() + ")");
    }
  } else {
    const std::size_t dim = !data.empty() ? data.front().x.size() : law ? law->dim() : 0;
    s = make_ogd_model_state(o.model, dim);
  }
  const std::size_t d = s.beta.size();
  const std::size_t start = s.n;

  if (o.simulate > 0) {
    if (!law) throw ConfigError("ogd: --simulate needs --covariates");
    const OgdRule rule(s.beta, *law, s.loss_scale, s.loss);
    RandomSource rng(c.seed);
    // The rule only fixes P_X and the loss; the stream continues from s.
    run_forward(rule, s, o.simulate, rng, [&](const OgdState&, const LabeledExample& e) { data.push_back(e); });
  }

  std::string traj = beta_header("n", d);
  traj += std::to_string(s.n) + "," + join_doubles(s.beta) + "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].x.size() != d)
      throw ConfigError("record " + std::to_string(i + 1) + ": covariate dimension differs from beta");
    s = ogd_update(std::move(s), data[i]);
    traj += std::to_string(s.n) + "," + join_doubles(s.beta) + "\n";
  }
  write_file(c.out("trajectory.csv"), traj);
  write_json(c.out("checkpoint.json"), s);
  if (s.n == 0) throw ConfigError("ogd: no observations to learn from");

  const auto cred = ogd_credible(s, o.level);
  std::string csv = "coordinate,center,lo,hi,v\n";
  for (std::size_t i = 0; i < d; ++i) {
    const auto& iv = cred.intervals[i];
    csv += std::to_string(i) + "," + format_double(iv.center) + "," + format_double(iv.lo) + "," +
           format_double(iv.hi) + "," + format_double(iv.v) + "\n";
  }
  write_file(c.out("credible.csv"), csv);
  write_json(c.out("gaussian.json"), cred.approx);

  Json report = report_header("ogd", c);
  report["mode"] = o.simulate > 0 ? "simulate" : "stream";
  report["loss"] = to_string(s.loss);
  report["loss_scale"] = s.loss_scale;
  report["resumed_from"] = start;
  report["n"] = s.n;
  report["beta"] = s.beta;
  report["level"] = o.level;
  report["intervals"] = cred.intervals;
  report["whitening"] = matrix_to_json(cred.whitening);
  report["data_digest"] = data_digest(std::span<const LabeledExample>(data));
  if (law && law->dim() == d && s.loss == OgdLoss::cross_entropy) report["plugin"] = plugin_comparison(s, *law);
  write_json(c.out("report.json"), report);
}

}  // namespace predictive::cli
