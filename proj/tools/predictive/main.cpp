#include <chrono>
#include <cstdlib>
#include <iostream>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace predictive;
using namespace predictive::cli;

namespace {

void add_rule_options(CLI::App* app, RuleOptions& r) {
  app->add_option("--rule", r.rule, std::string("predictive rule: ") + kRuleNames)->capture_default_str();
  app->add_option("--alpha", r.alpha, "concentration (total mass of the base)")->capture_default_str();
  app->add_option("--base", r.base, "base measure: uniformK, bernoulli:p, discrete:v=p,..., uniform:a:b, normal:m:s, tags")
      ->capture_default_str();
  app->add_option("--discount", r.discount, "Pitman-Yor discount")->capture_default_str();
  app->add_option("--boost", r.boost, "extra weight on the last observation (recency rule)")->capture_default_str();
  app->add_option("--kernel", r.kernel, "Newton kernel: bernoulli, binomial:m, poisson, normal:sigma")
      ->capture_default_str();
  app->add_option("--theta-grid", r.theta_grid, "Newton mixing grid points")->capture_default_str();
  app->add_option("--g0", r.g0, "Newton initial mixing probabilities (default uniform)")->capture_default_str();
  app->add_option("--newton-alpha", r.newton_alpha, "Newton weights alpha_n = 1/(a+n)")->capture_default_str();
  app->add_option("--states", r.states, "reinforced urn: number of states")->capture_default_str();
  app->add_option("--x0", r.x0, "reinforced urn: initial state")->capture_default_str();
}

void add_ogd_model(CLI::App* app, OgdModel& m) {
  app->add_option("--loss", m.loss, "cross_entropy or quadratic")->capture_default_str();
  app->add_option("--loss-scale", m.loss_scale, "step divisor L in 1/(n L); ln2 for bits")->capture_default_str();
  app->add_option("--beta0", m.beta0, "initial coefficients (default zeros)")->capture_default_str();
  app->add_option("--covariates", m.covariates, "finite covariate support, rows separated by ';'")
      ->capture_default_str();
  app->add_option("--covariate-probs", m.covariate_probs, "covariate probabilities (default uniform)")
      ->capture_default_str();
}

std::size_t default_workers() {
  if (const char* env = std::getenv("PREDICTIVE_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 1;
}

std::string echo(std::uint64_t seed, const CLI::App& sub) {
  return "seed=" + std::to_string(seed) + "\n[" + sub.get_name() + "]\n" + sub.config_to_str(true, false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Predictive-rule toolkit: simulation, sampling from the future, credible sets and diagnostics.");
  app.fallthrough();
  app.require_subcommand(1);
  Common common;
  common.workers = default_workers();
  app.add_option("--seed", common.seed, "64-bit seed")->capture_default_str();
  app.add_option("--workers", common.workers, "worker threads (default $PREDICTIVE_WORKERS or 1)")
      ->configurable(false);
  app.add_option("--out-dir", common.out_dir, "output directory")->configurable(false);
  app.set_config("--config", "", "INI file with one section per subcommand; flags win")->configurable(false);

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "simulate a chain from a predictive rule");
  s->configurable();
  add_rule_options(s, sim.rule);
  s->add_option("--steps", sim.steps)->capture_default_str();
  s->add_option("--grid", sim.grid, "optional grid: also write P_m on it")->capture_default_str();
  s->add_option("--gamma", sim.gamma, "oracle urn mass (franchise, ihmm)")->capture_default_str();
  s->add_option("--restaurants", sim.restaurants, "franchise: alpha_j per restaurant")->capture_default_str();

  ResampleOptions res;
  auto* r = app.add_subcommand("resample", "sample the prior or posterior of F(grid) by simulating the future");
  r->configurable();
  add_rule_options(r, res.rule);
  r->add_option("--data", res.data, "observations (CSV or JSONL); empty for the prior")->capture_default_str();
  r->add_option("--horizon", res.horizon, "total length N (0: n + 5000)")->capture_default_str();
  r->add_option("--replicates", res.replicates)->capture_default_str();
  r->add_option("--grid", res.grid)->capture_default_str();
  r->add_option("--estimator", res.estimator, "predictive or empirical")->capture_default_str();
  r->add_option("--histogram-bins", res.histogram_bins)->capture_default_str();

  CredibleOptions cred;
  auto* c = app.add_subcommand("credible", "asymptotic credible intervals from the predictive updates");
  c->configurable();
  add_rule_options(c, cred.rule);
  add_ogd_model(c, cred.ogd);
  c->add_option("--data", cred.data)->capture_default_str();
  c->add_option("--grid", cred.grid)->capture_default_str();
  c->add_option("--level", cred.level)->capture_default_str();

  NewtonOptions nw;
  nw.rule.rule = "newton";
  auto* n = app.add_subcommand("newton", "Newton's recursive mixing-distribution estimate");
  n->configurable();
  n->add_option("--kernel", nw.rule.kernel)->capture_default_str();
  n->add_option("--theta-grid", nw.rule.theta_grid)->capture_default_str();
  n->add_option("--g0", nw.rule.g0)->capture_default_str();
  n->add_option("--newton-alpha", nw.rule.newton_alpha)->capture_default_str();
  n->add_option("--data", nw.data, "observations; empty to simulate --steps")->capture_default_str();
  n->add_option("--steps", nw.steps)->capture_default_str();
  n->add_option("--replicates", nw.replicates, "posterior draws of G_N (0: none)")->capture_default_str();
  n->add_option("--horizon", nw.horizon, "N for the posterior draws (0: n + 5000)")->capture_default_str();

  OgdOptions og;
  auto* o = app.add_subcommand("ogd", "online gradient descent for logistic regression");
  o->configurable();
  add_ogd_model(o, og.model);
  o->add_option("--data", og.data, "(x, y) stream: JSONL or CSV")->capture_default_str();
  o->add_option("--checkpoint-in", og.checkpoint_in, "resume from a checkpoint")->capture_default_str();
  o->add_option("--level", og.level)->capture_default_str();
  o->add_option("--simulate", og.simulate, "simulate this many pairs instead of reading data")->capture_default_str();
  o->add_option("--coverage", og.coverage, "run a coverage experiment with this many replicates")
      ->capture_default_str();
  o->add_option("--n", og.n, "coverage: observed length")->capture_default_str();
  o->add_option("--horizon", og.horizon, "coverage: N used as the limit proxy")->capture_default_str();

  DiagnoseOptions dg;
  auto* d = app.add_subcommand("diagnose", "exact checks of exchangeability-type conditions");
  d->configurable();
  add_rule_options(d, dg.rule);
  d->add_option("--checks", dg.checks, "comma list: exchangeable, cid, partial, pcid, markov, eppf")
      ->capture_default_str();
  d->add_option("--n-max", dg.n_max)->capture_default_str();
  d->add_option("--columns", dg.columns, "partial/pcid: number of sequences")->capture_default_str();
  d->add_option("--weights", dg.weights, "partial/pcid: unit or cross")->capture_default_str();
  d->add_option("--markov-rule", dg.markov_rule, "reinforced, squared or constant")->capture_default_str();
  d->add_option("--depth", dg.depth)->capture_default_str();
  d->add_option("--eppf", dg.eppf, "crp or pitman-yor")->capture_default_str();

  GraphonOptions gr;
  auto* g = app.add_subcommand("graphon", "sample exchangeable binary arrays from a graphon");
  g->configurable();
  g->add_option("--graphon", gr.graphon, "constant:p, product, min, max, threshold:c, skew")->capture_default_str();
  g->add_option("--n", gr.n)->capture_default_str();
  g->add_option("--mode", gr.mode, "separate or joint")->capture_default_str();
  g->add_option("--replicates", gr.replicates)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (common.workers == 0) throw ConfigError("--workers must be >= 1");
    CLI::App* active = app.get_subcommands().front();
    common.config_echo = echo(common.seed, *active);
    std::filesystem::create_directories(common.out_dir);
    const std::string name = active->get_name();
    if (name == "simulate") run_simulate(common, sim);
    else if (name == "resample") run_resample(common, res);
    else if (name == "credible") run_credible(common, cred);
    else if (name == "newton") run_newton(common, nw);
    else if (name == "ogd") run_ogd(common, og);
    else if (name == "diagnose") run_diagnose(common, dg);
    else if (name == "graphon") run_graphon(common, gr);
    write_echo(common);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(common.out("runtime.json"),
               Json{{"command", name}, {"wall_clock_seconds", secs}, {"workers", common.workers}, {"version", kVersion}});
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
