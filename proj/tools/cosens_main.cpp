// cosens command-line tool
// ------------------------
// Orchestrates the full pipeline: load a clustered dataset, fit weights,
// estimate effects, and run the sensitivity-analysis stack. Every subcommand
// writes machine-readable JSON (and plot-ready CSV) reports into --out.

#include <CLI11.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "cosens/analysis.hpp"

namespace {

using cosens::AnalysisConfig;

struct GlobalFlags {
  std::string config_path;
  std::string data, schema, out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool quiet = false;
  std::string conditioning, estimand, weights;
  double ridge = -1.0;
  std::vector<std::string> omit;
};

void apply_globals(const GlobalFlags& g, AnalysisConfig* c) {
  if (!g.data.empty()) c->data_path = g.data;
  if (!g.schema.empty()) c->schema_path = g.schema;
  if (!g.out.empty()) c->out_dir = g.out;
  if (g.seed_set) c->seed = g.seed;
  if (g.quiet) c->quiet = true;
  if (!g.conditioning.empty()) {
    c->weights.conditioning = cosens::conditioning_from_string(g.conditioning);
  }
  if (!g.estimand.empty()) {
    c->weights.estimand = cosens::estimand_from_string(g.estimand);
  }
  if (!g.weights.empty()) {
    if (g.weights == "propensity") {
      c->weights.source = cosens::WeightSource::propensity;
    } else if (g.weights == "balancing") {
      c->weights.source = cosens::WeightSource::balancing;
    } else if (g.weights.rfind("external:", 0) == 0) {
      c->weights.source = cosens::WeightSource::external;
      c->weights.external_path = g.weights.substr(9);
    } else {
      cosens::throw_config("unknown --weights value '" + g.weights + "'");
    }
  }
  if (g.ridge >= 0.0) c->weights.propensity.ridge = g.ridge;
  if (!g.omit.empty()) c->weights.omit = g.omit;
}

std::vector<double> parse_param_grid(const std::vector<double>& params,
                                     const std::string& grid) {
  std::vector<double> out = params;
  if (!grid.empty()) {
    double a = 0, b = 0, step = 0;
    if (std::sscanf(grid.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
        step <= 0 || b < a) {
      cosens::throw_config("invalid --grid '" + grid + "' (expected a:b:step)");
    }
    for (double v = a; v <= b + step * 0.5; v += step) out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighting estimators and sensitivity analysis for clustered "
               "observational studies"};
  app.require_subcommand(0, 1);

  GlobalFlags g;
  app.add_option("--config", g.config_path, "JSON analysis configuration");
  app.add_option("--data", g.data, "unit-level CSV data file");
  app.add_option("--schema", g.schema, "JSON schema (column roles)");
  app.add_option("--out", g.out, "output directory for reports");
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed");
  app.add_flag("--quiet", g.quiet, "suppress error output");
  app.add_option("--conditioning", g.conditioning, "cud or cod")
      ->check(CLI::IsMember({"cud", "cod"}));
  app.add_option("--estimand", g.estimand, "att, ato or ate")
      ->check(CLI::IsMember({"att", "ato", "ate"}));
  app.add_option("--weights", g.weights,
                 "propensity, balancing or external:<path>");
  app.add_option("--ridge", g.ridge, "ridge penalty for the propensity fit");
  app.add_option("--omit", g.omit, "covariates to drop before fitting")
      ->delimiter(',');

  auto* cmd_load = app.add_subcommand("load-check", "load and validate the dataset");
  auto* cmd_balance = app.add_subcommand("balance", "standardized-difference table");
  auto* cmd_estimate = app.add_subcommand("estimate", "weighted effect estimate");

  auto* cmd_decompose = app.add_subcommand(
      "decompose", "bias decomposition with designated covariates as V and U");
  std::vector<std::string> treat_as_v, treat_as_u;
  cmd_decompose->add_option("--treat-as-v", treat_as_v,
                            "cluster covariates played as the omitted V")
      ->delimiter(',');
  cmd_decompose->add_option("--treat-as-u", treat_as_u,
                            "unit covariates played as the omitted U")
      ->delimiter(',');

  auto* cmd_sens = app.add_subcommand("sensitivity", "MSM/VBM bounds and threshold");
  std::string sens_model = "msm", sens_grid;
  std::vector<double> sens_params;
  bool sens_threshold = false, sens_plot = false;
  cmd_sens->add_option("--model", sens_model, "msm or vbm")
      ->check(CLI::IsMember({"msm", "vbm"}));
  cmd_sens->add_option("--param", sens_params, "sensitivity parameter (repeatable)");
  cmd_sens->add_option("--grid", sens_grid, "parameter grid a:b:step");
  cmd_sens->add_flag("--threshold", sens_threshold, "report the robustness threshold");
  cmd_sens->add_flag("--emit-plot", sens_plot, "write a plot-ready CSV grid");

  auto* cmd_amplify = app.add_subcommand("amplify", "split a parameter into V/U components");
  std::string amp_model = "vbm";
  double amp_total = 0.0;
  int amp_grid = 21;
  cmd_amplify->add_option("--model", amp_model, "msm or vbm")
      ->check(CLI::IsMember({"msm", "vbm"}));
  cmd_amplify->add_option("--total", amp_total, "total parameter value")->required();
  cmd_amplify->add_option("--grid-size", amp_grid, "number of grid points");

  auto* cmd_bench = app.add_subcommand("benchmark", "leave-covariate-out calibration");
  std::vector<std::string> bench_omit;
  cmd_bench->add_option("--omit", bench_omit,
                        "covariate subset 'a[,b...]' (repeatable)");

  auto* cmd_boot = app.add_subcommand("bootstrap", "cluster bootstrap percentile CI");
  int boot_B = 200;
  double boot_level = 0.95, boot_param = 0.0;
  std::string boot_stat = "estimate";
  cmd_boot->add_option("--B", boot_B, "bootstrap replicates");
  cmd_boot->add_option("--level", boot_level, "confidence level");
  cmd_boot->add_option("--statistic", boot_stat,
                       "estimate, msm_lower/upper or vbm_lower/upper");
  cmd_boot->add_option("--param", boot_param, "sensitivity parameter for bounds");

  auto* cmd_sim = app.add_subcommand("simulate", "synthetic-DGP validation studies");
  int sim_study = 1, sim_reps = 200, sim_B = 200;
  std::vector<double> sim_c;
  cmd_sim->add_option("--study", sim_study, "1 or 2")->check(CLI::IsMember({1, 2}));
  cmd_sim->add_option("--reps", sim_reps, "replications per condition");
  cmd_sim->add_option("--c", sim_c, "overlap levels")->delimiter(',');
  cmd_sim->add_option("--B", sim_B, "bootstrap replicates (study 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    AnalysisConfig config;
    if (!g.config_path.empty()) {
      config = AnalysisConfig::from_json_file(g.config_path);
    }
    g.seed_set = seed_opt->count() > 0;
    apply_globals(g, &config);

    if (cmd_load->parsed()) config.want_load_check = true;
    if (cmd_balance->parsed()) config.want_balance = true;
    if (cmd_estimate->parsed()) config.want_estimate = true;
    if (cmd_decompose->parsed()) {
      config.decompose = cosens::DecomposeRequest{treat_as_v, treat_as_u};
    }
    if (cmd_sens->parsed()) {
      cosens::SensitivityRequest r;
      r.model = cosens::sens_model_from_string(sens_model);
      r.params = parse_param_grid(sens_params, sens_grid);
      r.threshold = sens_threshold || r.params.empty();
      r.emit_plot = sens_plot;
      config.sensitivity = std::move(r);
    }
    if (cmd_amplify->parsed()) {
      config.amplify = cosens::AmplifyRequest{
          cosens::sens_model_from_string(amp_model), amp_total, amp_grid};
    }
    if (cmd_bench->parsed()) {
      cosens::BenchmarkRequest r;
      for (const auto& spec : bench_omit) {
        std::vector<std::string> subset;
        std::string cur;
        for (char ch : spec) {
          if (ch == ',') {
            if (!cur.empty()) subset.push_back(cur);
            cur.clear();
          } else {
            cur += ch;
          }
        }
        if (!cur.empty()) subset.push_back(cur);
        r.subsets.push_back(std::move(subset));
      }
      config.benchmark = std::move(r);
    }
    if (cmd_boot->parsed()) {
      config.bootstrap = cosens::BootstrapRequest{boot_B, boot_level, boot_stat, boot_param};
    }
    if (cmd_sim->parsed()) {
      cosens::SimulateRequest r;
      r.study = sim_study;
      r.options.replications = sim_reps;
      r.options.B = sim_B;
      if (!sim_c.empty()) r.options.c_values = sim_c;
      if (sim_study == 2 && sim_c.empty()) r.options.c_values = {10.0};
      config.simulate = std::move(r);
    }

    return cosens::run_analysis(config);
  } catch (const cosens::Error& e) {
    if (!g.quiet) std::fprintf(stderr, "error: %s\n", e.what());
    return cosens::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    if (!g.quiet) std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
