#include <cmath>
#include <cstdio>
#include <iostream>

#include "commands.hpp"

namespace predictive::cli {

namespace {

PcidRule make_array_rule(const DiagnoseOptions& o) {
  if (o.columns < 1) throw ConfigError("diagnose: columns must be >= 1");
  if (o.rule.rule != "polya")
    throw ConfigError("diagnose: partial/pcid checks use --rule polya per sequence, got '" + o.rule.rule + "'");
  std::vector<double> alphas(o.columns, o.rule.alpha);
  std::vector<BaseMeasure> bases(o.columns, parse_base(o.rule.base));
  if (o.weights == "unit") return PcidRule(std::move(alphas), std::move(bases));
  if (o.weights == "cross") {
    const double boost = o.rule.boost;
    if (!(boost >= 0.0)) throw ConfigError("diagnose: boost must be >= 0 for cross weights");
    // W_j = 1 + boost * (sum of the other entries of the row); never looks at row[j].
    return PcidRule(std::move(alphas), std::move(bases), [boost](std::size_t j, const Row& row) {
      double s = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k)
        if (k != j) s += scalar_value(row[k]);
      return 1.0 + boost * s;
    });
  }
  throw ConfigError("unknown weights '" + o.weights + "' (expected unit|cross)");
}

std::pair<RowPredictive, std::string> make_markov_predictive(const DiagnoseOptions& o,
                                                             const std::vector<Label>& states) {
  RuleOptions r = o.rule;
  const double alpha = r.alpha;
  const auto d = static_cast<double>(states.size());
  if (o.markov_rule == "reinforced") return {reinforced_row_predictive(reinforced_params(r), states), "reinforced-urn"};
  if (o.markov_rule == "squared") {
    // Reinforcement by squared counts: not Markov exchangeable.
    return {[alpha, d, states](Label y, Label, const std::vector<std::size_t>& row) {
              double total = 0.0, ty = 0.0;
              for (std::size_t i = 0; i < states.size(); ++i) {
                const double c = static_cast<double>(row[i]) * static_cast<double>(row[i]);
                total += c;
                if (states[i] == y) ty = c;
              }
              return (alpha / d + ty) / (alpha + total);
            },
            "squared-reinforcement"};
  }
  if (o.markov_rule == "constant")
    return {[d](Label, Label, const std::vector<std::size_t>&) { return 1.0 / d; }, "uniform-iid"};
  throw ConfigError("unknown markov rule '" + o.markov_rule + "' (expected reinforced|squared|constant)");
}

std::string table_row(const DiagnosticReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-20s %-24s %-8s %12.3e %10.1e\n", r.check.c_str(), r.subject.c_str(),
                to_string(r.verdict), r.worst, r.tolerance);
  return buf;
}

}  // namespace

void run_diagnose(const Common& c, const DiagnoseOptions& o) {
  std::vector<DiagnosticReport> reports;
  for (auto check_view : split(o.checks, ',')) {
    const std::string check(check_view);
    if (check == "exchangeable" || check == "cid") {
      const auto rule = make_rule(o.rule);
      std::visit(
          [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (MassRule<R>) {
              if (!r.support())
                throw ConfigError("diagnose: " + check + " needs a finite sample space; rule '" + r.name() +
                                  "' has none");
              reports.push_back(check == "exchangeable" ? check_exchangeable(r, o.n_max) : check_cid(r, o.n_max));
            } else {
              throw ConfigError("diagnose: rule '" + r.name() + "' exposes no point masses");
            }
          },
          rule);
    } else if (check == "partial" || check == "pcid") {
      const auto rule = make_array_rule(o);
      reports.push_back(check == "partial" ? check_partial_exch(rule, o.n_max) : check_pcid(rule, o.n_max));
    } else if (check == "markov") {
      if (o.rule.states < 1) throw ConfigError("diagnose: states must be >= 1");
      std::vector<Label> states;
      for (std::int64_t x = 0; x < o.rule.states; ++x) states.push_back(Label{x});
      auto [pred, subject] = make_markov_predictive(o, states);
      reports.push_back(check_markov_exch(pred, states, o.depth, subject));
    } else if (check == "eppf") {
      if (o.eppf == "crp") {
        if (!(o.rule.alpha > 0.0)) throw ConfigError("crp: alpha must be > 0");
        reports.push_back(check_eppf(crp_eppf(o.rule.alpha), o.n_max));
      } else if (o.eppf == "pitman-yor") {
        check_pitman_yor(o.rule.alpha, o.rule.discount);
        reports.push_back(check_eppf(pitman_yor_eppf(o.rule.alpha, o.rule.discount), o.n_max));
      } else {
        throw ConfigError("unknown eppf '" + o.eppf + "' (expected crp|pitman-yor)");
      }
    } else {
      throw ConfigError("unknown check '" + check + "' (expected exchangeable|cid|partial|pcid|markov|eppf)");
    }
  }

  Json report = report_header("diagnose", c);
  report["rule"] = rule_json(o.rule);
  report["reports"] = reports;
  write_json(c.out("diagnostics.json"), report);

  std::string table = "check                subject                  verdict         worst  tolerance\n";
  for (const auto& r : reports) table += table_row(r);
  std::cout << table;
}

void run_graphon(const Common& c, const GraphonOptions& o) {
  const auto w = parse_graphon(o.graphon);
  GraphonMode mode;
  if (o.mode == "separate")
    mode = GraphonMode::separate;
  else if (o.mode == "joint")
    mode = GraphonMode::joint;
  else
    throw ConfigError("unknown mode '" + o.mode + "' (expected separate|joint)");
  if (o.n < 1) throw ConfigError("graphon: n must be >= 1");
  if (o.replicates < 1) throw ConfigError("graphon: replicates must be >= 1");

  std::vector<BinaryArray> arrays(o.replicates);
  const RandomSource root(c.seed);
  detail::parallel_replicates(o.replicates, c.workers, [&](std::size_t r) {
    RandomSource rng = root.branch(r);
    arrays[r] = graphon_sample(w, o.n, mode, rng);
  });

  std::string csv = "replicate,row";
  for (std::size_t j = 0; j < o.n; ++j) csv += ",c" + std::to_string(j);
  csv += "\n";
  std::size_t ones = 0;
  for (std::size_t r = 0; r < arrays.size(); ++r) {
    for (std::size_t i = 0; i < o.n; ++i) {
      csv += std::to_string(r) + "," + std::to_string(i);
      for (std::size_t j = 0; j < o.n; ++j) csv += arrays[r](i, j) ? ",1" : ",0";
      csv += "\n";
    }
    ones += arrays[r].ones();
  }
  write_file(c.out("array.csv"), csv);

  // Cells that carry a draw: all n^2 in separate mode, off-diagonal in joint mode.
  const double cells_per = mode == GraphonMode::separate ? static_cast<double>(o.n * o.n)
                                                         : static_cast<double>(o.n * (o.n - 1));
  const double cells = cells_per * static_cast<double>(o.replicates);
  Json report = report_header("graphon", c);
  report["graphon"] = o.graphon;
  report["mode"] = o.mode;
  report["n"] = o.n;
  report["replicates"] = o.replicates;
  report["ones"] = ones;
  report["edge_frequency"] = cells > 0.0 ? static_cast<double>(ones) / cells : 0.0;
  write_json(c.out("report.json"), report);
}

}  // namespace predictive::cli
