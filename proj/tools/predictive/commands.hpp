#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "specs.hpp"

namespace predictive::cli {

inline constexpr const char* kVersion = "0.1.0";

struct Common {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out_dir = ".";
  std::string config_echo;  // INI text reproducing the run

  std::filesystem::path out(const std::string& name) const { return std::filesystem::path(out_dir) / name; }
};

struct SimulateOptions {
  RuleOptions rule;
  std::size_t steps = 100;
  std::string grid;  // optional: also record P_m on this grid
  double gamma = 1.0;
  std::string restaurants = "1,1";
};

struct ResampleOptions {
  RuleOptions rule;
  std::string data;
  std::size_t horizon = 0;
  std::size_t replicates = 2000;
  std::string grid = "0.5";
  std::string estimator = "predictive";
  std::size_t histogram_bins = 0;
};

struct OgdModel {
  std::string loss = "cross_entropy";
  std::string loss_scale = "ln2";
  std::string beta0;  // empty: zero vector
  std::string covariates = "1,0;1,1";
  std::string covariate_probs;
};

struct CredibleOptions {
  RuleOptions rule;
  OgdModel ogd;
  std::string data;
  std::string grid = "0.5";
  double level = 0.95;
};

struct NewtonOptions {
  RuleOptions rule;
  std::string data;
  std::size_t steps = 100;
  std::size_t replicates = 0;
  std::size_t horizon = 0;
};

struct OgdOptions {
  OgdModel model;
  std::string data;
  std::string checkpoint_in;
  double level = 0.95;
  std::size_t simulate = 0;
  std::size_t coverage = 0;
  std::size_t n = 5000;
  std::size_t horizon = 50000;
};

struct DiagnoseOptions {
  RuleOptions rule;
  std::string checks = "exchangeable,cid";
  std::size_t n_max = 4;
  std::size_t columns = 2;
  std::string weights = "unit";
  std::string markov_rule = "reinforced";
  std::size_t depth = 4;
  std::string eppf = "crp";
};

struct GraphonOptions {
  std::string graphon = "constant:0.3";
  std::size_t n = 30;
  std::string mode = "separate";
  std::size_t replicates = 1;
};

void run_simulate(const Common& c, const SimulateOptions& o);
void run_resample(const Common& c, const ResampleOptions& o);
void run_credible(const Common& c, const CredibleOptions& o);
void run_newton(const Common& c, const NewtonOptions& o);
void run_ogd(const Common& c, const OgdOptions& o);
void run_diagnose(const Common& c, const DiagnoseOptions& o);
void run_graphon(const Common& c, const GraphonOptions& o);

/// Header shared by every report.json.
inline Json report_header(const std::string& command, const Common& c) {
  return Json{{"command", command}, {"seed", c.seed}, {"version", kVersion}, {"config", c.config_echo}};
}

/// Finishes a run: config echo next to the outputs.
inline void write_echo(const Common& c) { write_file(c.out("config.ini"), c.config_echo); }

inline double parse_loss_scale(const std::string& s) {
  if (s == "ln2") return std::numbers::ln2;
  const double v = parse_double(s, "loss-scale");
  if (!(v > 0.0)) throw ConfigError("loss-scale must be > 0");
  return v;
}

inline OgdLoss parse_loss(const std::string& s) {
  if (s == "cross_entropy") return OgdLoss::cross_entropy;
  if (s == "quadratic") return OgdLoss::quadratic;
  throw ConfigError("unknown loss '" + s + "' (expected cross_entropy|quadratic)");
}

/// Initial OGD state from the model options; beta0 defaults to zeros of `dim`.
inline OgdState make_ogd_model_state(const OgdModel& m, std::size_t dim) {
  auto beta0 = parse_list(m.beta0, "beta0");
  if (beta0.empty()) beta0.assign(dim, 0.0);
  if (dim != 0 && beta0.size() != dim)
    throw ConfigError("beta0 has dimension " + std::to_string(beta0.size()) + " but covariates have " +
                      std::to_string(dim));
  return make_ogd_state(std::move(beta0), parse_loss_scale(m.loss_scale), parse_loss(m.loss));
}

/// Visits the rule, requiring a distribution function.
template <class F>
void with_scalar_rule(const AnyRule& rule, const std::string& command, F&& f) {
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (ScalarRule<R>)
          f(r);
        else
          throw ConfigError(command + ": rule '" + r.name() + "' has no distribution function");
      },
      rule);
}

inline std::vector<Point> load_observations(const std::string& path, const AnyRule& rule, const RuleOptions& o) {
  if (path.empty()) return {};
  return read_observations(path, observation_kind(rule, o));
}

}  // namespace predictive::cli
