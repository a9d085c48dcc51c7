#include "cosens/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>

#include "cosens/decompose.hpp"
#include "cosens/estimate.hpp"
#include "cosens/sensitivity.hpp"
#include "json_io.hpp"

namespace cosens {

namespace {

ojson moments_json(const GroupMoments& m) {
  ojson j;
  const char* names[2] = {"control", "treated"};
  for (int a = 0; a < 2; ++a) {
    ojson mj;
    mj["n"] = m.arm[a].n;
    mj["mean_y"] = m.arm[a].mean_y;
    mj["var_y"] = m.arm[a].var_y;
    mj["var_w"] = m.arm[a].var_w;
    mj["cor_wy"] = m.arm[a].cor_wy;
    mj["cor_defined"] = m.arm[a].cor_defined;
    j[names[a]] = std::move(mj);
  }
  return j;
}

class WarningLog {
 public:
  void add(const std::string& w) {
    if (seen_.insert(w).second) warnings_.push_back(w);
  }
  const std::vector<std::string>& all() const { return warnings_; }

 private:
  std::set<std::string> seen_;
  std::vector<std::string> warnings_;
};

// Lazily loaded pipeline state shared across stages.
struct Pipeline {
  const AnalysisConfig& config;
  WarningLog& warnings;
  std::optional<CosDataset> ds;
  std::optional<WeightSet> weights;
  std::optional<EffectEstimate> estimate;

  const CosDataset& dataset() {
    if (!ds) {
      if (config.data_path.empty()) throw_config("no data file configured");
      if (config.schema_path.empty()) throw_config("no schema file configured");
      SchemaConfig schema = SchemaConfig::from_json_file(config.schema_path);
      ds.emplace(load_dataset(config.data_path, schema));
    }
    return *ds;
  }

  const WeightSet& fitted_weights() {
    if (!weights) {
      weights = fit_weights(dataset(), config.weights);
      if (weights->clip_warning) {
        warnings.add("propensity scores were clipped at the [1e-06, 1-1e-06] boundary");
      }
    }
    return *weights;
  }

  const EffectEstimate& effect() {
    if (!estimate) estimate = point_estimate(dataset(), fitted_weights());
    return *estimate;
  }
};

std::string out_path(const AnalysisConfig& c, const std::string& name) {
  std::filesystem::path p(c.out_dir);
  return (p / name).string();
}

void stage_load_check(Pipeline& p, ojson& top) {
  const CosDataset& ds = p.dataset();
  ojson j;
  j["data"] = p.config.data_path;
  j["m"] = ds.m();
  j["n"] = ds.n();
  j["n1"] = ds.n1();
  j["n0"] = ds.n0();
  j["d_x"] = ds.d_x();
  j["d_k"] = ds.d_k();
  write_report_file(out_path(p.config, "load_check.json"), j);
  top["stages"].push_back("load_check");
}

void stage_balance(Pipeline& p, ojson& top) {
  const CosDataset& ds = p.dataset();
  std::vector<StdDiff> raw = standardized_differences(ds, nullptr);
  const WeightSet& w = p.fitted_weights();
  std::vector<StdDiff> weighted = standardized_differences(ds, &w);

  CsvTable t;
  t.header = {"covariate", "level", "std_diff_unweighted", "std_diff_weighted"};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].degenerate) {
      p.warnings.add("covariate '" + raw[i].name + "' has zero pooled variance");
    }
    t.rows.push_back({raw[i].name, to_string(raw[i].level),
                      format_double(raw[i].value), format_double(weighted[i].value)});
  }
  write_csv(out_path(p.config, "balance.csv"), t);
  top["stages"].push_back("balance");
}

void stage_estimate(Pipeline& p, ojson& top) {
  const EffectEstimate& est = p.effect();
  ojson j;
  j["estimand"] = to_string(est.estimand);
  j["tau_hat"] = est.tau_hat;
  j["weight_source"] = to_string(est.weight_source);
  if (est.conditioning) j["conditioning"] = to_string(*est.conditioning);
  j["moments"] = moments_json(est.moments);
  ojson flags;
  flags["clip_warning"] = est.clip_warning;
  flags["cor_undefined_control"] = !est.moments.arm[0].cor_defined;
  flags["cor_undefined_treated"] = !est.moments.arm[1].cor_defined;
  j["flags"] = std::move(flags);
  write_report_file(out_path(p.config, "estimate.json"), j);
  top["stages"].push_back("estimate");
}

void stage_decompose(Pipeline& p, const DecomposeRequest& req, ojson& top) {
  const CosDataset& ds = p.dataset();
  // Nested fits: reduced omits both designated groups, mid omits only U.
  WeightConfig full_cfg = p.config.weights;
  WeightConfig mid_cfg = full_cfg;
  mid_cfg.omit.insert(mid_cfg.omit.end(), req.treat_as_u.begin(), req.treat_as_u.end());
  WeightConfig red_cfg = mid_cfg;
  red_cfg.omit.insert(red_cfg.omit.end(), req.treat_as_v.begin(), req.treat_as_v.end());

  WeightTriple triple{fit_weights(ds, red_cfg), fit_weights(ds, mid_cfg),
                      fit_weights(ds, full_cfg)};
  DecompositionReport rep = p.config.weights.estimand == Estimand::att
                                ? att_bias_decomposition(triple, ds)
                                : ato_bias_decomposition(triple, ds);
  if (rep.clamped) p.warnings.add("an R-squared value was clamped below 1");

  ojson j;
  j["estimand"] = to_string(rep.estimand);
  j["treat_as_v"] = req.treat_as_v;
  j["treat_as_u"] = req.treat_as_u;
  const char* arm_names[2] = {"control", "treated"};
  for (int a = 0; a < 2; ++a) {
    if (!rep.arm_used[static_cast<std::size_t>(a)]) continue;
    ojson aj;
    aj["r2_v"] = rep.r2_v[static_cast<std::size_t>(a)];
    aj["r2_u"] = rep.r2_u[static_cast<std::size_t>(a)];
    aj["cor_v"] = rep.cor_v[static_cast<std::size_t>(a)];
    aj["cor_u"] = rep.cor_u[static_cast<std::size_t>(a)];
    aj["scale"] = rep.scale[static_cast<std::size_t>(a)];
    j[arm_names[a]] = std::move(aj);
  }
  j["cluster_term"] = rep.cluster_term;
  j["unit_term"] = rep.unit_term;
  j["total_bias"] = rep.total_bias;
  j["identity_residual"] = rep.identity_residual;
  j["clamped"] = rep.clamped;
  write_report_file(out_path(p.config, "decompose.json"), j);
  top["stages"].push_back("decompose");
}

void stage_sensitivity(Pipeline& p, const SensitivityRequest& req, ojson& top) {
  const CosDataset& ds = p.dataset();
  const WeightSet& w = p.fitted_weights();

  ojson j;
  j["model"] = to_string(req.model);
  j["estimand"] = to_string(w.estimand);
  ojson rows = ojson::array();
  CsvTable grid;
  grid.header = {"param", "lower", "upper"};
  for (double param : req.params) {
    double lower, upper;
    if (req.model == SensModel::msm) {
      MsmResult r = msm_bounds(ds, w, param);
      lower = r.lower;
      upper = r.upper;
    } else {
      VbmResult r = vbm_bound(p.effect(), param);
      if (r.cor_flagged) {
        p.warnings.add("undefined cor(w, Y) treated as 0 in the variance-based bound");
      }
      lower = r.lower;
      upper = r.upper;
    }
    ojson row;
    row["param"] = param;
    row["lower"] = lower;
    row["upper"] = upper;
    rows.push_back(std::move(row));
    grid.rows.push_back({format_double(param), format_double(lower), format_double(upper)});
  }
  j["rows"] = std::move(rows);

  if (req.threshold) {
    ThresholdResult t = req.model == SensModel::msm ? msm_threshold(ds, w)
                                                    : vbm_threshold(p.effect());
    if (t.unbounded) {
      p.warnings.add("robustness threshold is unbounded: no parameter value "
                     "brings the interval to zero");
    }
    ojson tj;
    tj["model"] = to_string(t.model);
    tj["value"] = t.value;
    tj["lower_at_value"] = t.lower_at_value;
    tj["upper_at_value"] = t.upper_at_value;
    tj["unbounded"] = t.unbounded;
    j["threshold"] = std::move(tj);
  }
  write_report_file(out_path(p.config, "sensitivity.json"), j);
  if (req.emit_plot) {
    write_csv(out_path(p.config, "sensitivity_grid.csv"), grid);
  }
  top["stages"].push_back("sensitivity");
}

void stage_amplify(Pipeline& p, const AmplifyRequest& req, ojson& top) {
  AmplificationCurve curve = req.model == SensModel::msm
                                 ? amplify_lambda(req.total, req.grid_size)
                                 : amplify_r2(req.total, req.grid_size);
  ojson j;
  j["model"] = to_string(curve.model);
  j["total"] = curve.total;
  ojson pts = ojson::array();
  CsvTable t;
  t.header = {"component_v", "component_u"};
  for (const auto& pt : curve.points) {
    ojson pj;
    pj["component_v"] = pt.component_v;
    pj["component_u"] = pt.component_u;
    pts.push_back(std::move(pj));
    t.rows.push_back({format_double(pt.component_v), format_double(pt.component_u)});
  }
  j["points"] = std::move(pts);
  write_report_file(out_path(p.config, "amplify.json"), j);
  write_csv(out_path(p.config, "amplify_grid.csv"), t);
  top["stages"].push_back("amplify");
}

void stage_benchmark(Pipeline& p, const BenchmarkRequest& req, ojson& top) {
  const CosDataset& ds = p.dataset();
  const WeightSet& base = p.fitted_weights();
  std::vector<BenchmarkEntry> entries =
      cosens::benchmark(ds, base, req.subsets, p.config.weights);

  ojson j;
  ojson rows = ojson::array();
  for (const auto& e : entries) {
    if (!e.refit_ok) p.warnings.add("a benchmark refit failed; entry flagged");
    if (e.clamped) {
      p.warnings.add("a benchmark R-squared was negative and clamped to 0");
    }
    ojson ej;
    ej["omitted"] = e.omitted;
    ojson levels = ojson::array();
    for (auto l : e.levels) levels.push_back(to_string(l));
    ej["levels"] = std::move(levels);
    ej["refit_ok"] = e.refit_ok;
    if (e.refit_ok) {
      ej["r2_raw"] = e.r2_raw;
      ej["r2_b"] = e.r2_b;
      ej["lambda_b"] = e.lambda_b;
      ej["clamped"] = e.clamped;
    }
    rows.push_back(std::move(ej));
  }
  j["entries"] = std::move(rows);

  ThresholdResult t = vbm_threshold(p.effect());
  j["threshold_r2"] = t.value;
  j["threshold_unbounded"] = t.unbounded;
  write_report_file(out_path(p.config, "benchmark.json"), j);
  if (!t.unbounded) {
    write_csv(out_path(p.config, "benchmark_plot.csv"),
              benchmark_plot_data(entries, t.value));
  }
  top["stages"].push_back("benchmark");
}

void stage_bootstrap(Pipeline& p, const BootstrapRequest& req, ojson& top) {
  BootstrapSpec spec;
  spec.B = req.B;
  spec.level = req.level;
  spec.seed = p.config.seed;
  spec.statistic = Statistic::from_string(req.statistic, req.param);
  BootstrapCI ci = block_bootstrap(p.dataset(), spec, p.config.weights);
  if (ci.failures > 0) {
    p.warnings.add("bootstrap skipped " + std::to_string(ci.failures) +
                   " degenerate replicates");
  }
  ojson j;
  j["statistic"] = spec.statistic.name();
  j["param"] = spec.statistic.param;
  j["B"] = spec.B;
  j["level"] = spec.level;
  j["seed"] = spec.seed;
  j["lower"] = ci.lower;
  j["upper"] = ci.upper;
  j["replicates_used"] = ci.replicates_used;
  j["failures"] = ci.failures;
  write_report_file(out_path(p.config, "bootstrap.json"), j);
  top["stages"].push_back("bootstrap");
}

void stage_simulate(Pipeline& p, const SimulateRequest& req, ojson& top) {
  DgpConfig dgp = req.dgp;
  if (p.config.seed != 0) dgp.seed = p.config.seed;
  SimReport rep = req.study == 1 ? run_sim1(dgp, req.options)
                                 : run_sim2(dgp, req.options);

  ojson j;
  j["study"] = rep.study;
  j["replications"] = req.options.replications;
  j["seed"] = dgp.seed;
  ojson conds = ojson::array();
  for (const auto& c : rep.conditions) {
    if (c.failures > 0) {
      p.warnings.add("simulation replicates failed and were excluded");
    }
    ojson cj;
    cj["c"] = c.c;
    cj["pattern"] = to_string(c.pattern);
    cj["replications"] = c.replications;
    cj["used"] = c.used;
    cj["failures"] = c.failures;
    cj["msm_coverage"] = c.msm_coverage;
    cj["vbm_coverage"] = c.vbm_coverage;
    cj["msm_mean_length"] = c.msm_mean_length;
    cj["vbm_mean_length"] = c.vbm_mean_length;
    if (c.has_bootstrap) {
      cj["msm_boot_coverage"] = c.msm_boot_coverage;
      cj["vbm_boot_coverage"] = c.vbm_boot_coverage;
    }
    conds.push_back(std::move(cj));
  }
  j["conditions"] = std::move(conds);
  write_report_file(out_path(p.config, "simulate_summary.json"), j);

  CsvTable t;
  t.header = {"c", "pattern", "rep", "ok", "tau_truth", "tau_hat",
              "r2_oracle", "lambda_oracle", "msm_lower", "msm_upper",
              "vbm_lower", "vbm_upper", "msm_covers", "vbm_covers"};
  const bool boot = rep.study == 2;
  if (boot) {
    for (const char* h : {"msm_boot_lower", "msm_boot_upper", "vbm_boot_lower",
                          "vbm_boot_upper", "msm_boot_covers", "vbm_boot_covers"}) {
      t.header.push_back(h);
    }
  }
  for (const auto& r : rep.records) {
    std::vector<std::string> row = {
        format_double(r.c), to_string(r.pattern), std::to_string(r.rep),
        r.ok ? "1" : "0", format_double(r.tau_truth), format_double(r.tau_hat),
        format_double(r.r2_oracle), format_double(r.lambda_oracle),
        format_double(r.msm_lower), format_double(r.msm_upper),
        format_double(r.vbm_lower), format_double(r.vbm_upper),
        r.msm_covers ? "1" : "0", r.vbm_covers ? "1" : "0"};
    if (boot) {
      row.push_back(format_double(r.msm_boot_lower));
      row.push_back(format_double(r.msm_boot_upper));
      row.push_back(format_double(r.vbm_boot_lower));
      row.push_back(format_double(r.vbm_boot_upper));
      row.push_back(r.msm_boot_covers ? "1" : "0");
      row.push_back(r.vbm_boot_covers ? "1" : "0");
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(out_path(p.config, "simulate_records.csv"), t);
  top["stages"].push_back("simulate");
}

}  // namespace

int exit_code_for(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::config: return 2;
    case Error::Kind::data: return 3;
    case Error::Kind::numeric: return 4;
    case Error::Kind::contract: return 4;
  }
  return 4;
}

int run_analysis(const AnalysisConfig& config) {
  WarningLog warnings;
  Pipeline p{config, warnings, std::nullopt, std::nullopt, std::nullopt};

  ojson top;
  top["seed"] = config.seed;
  top["stages"] = ojson::array();

  std::string failed_stage;
  std::optional<Error> failure;
  try {
    // Early validation: balancing weights support ATT only, so reject the
    // recipe before any heavy work.
    if (config.weights.source == WeightSource::balancing &&
        config.weights.estimand != Estimand::att) {
      throw_config("balancing weights support only the ATT estimand");
    }
    std::filesystem::create_directories(config.out_dir);

    if (config.want_load_check) {
      failed_stage = "load_check";
      stage_load_check(p, top);
    }
    if (config.want_balance) {
      failed_stage = "balance";
      stage_balance(p, top);
    }
    if (config.want_estimate) {
      failed_stage = "estimate";
      stage_estimate(p, top);
    }
    if (config.decompose) {
      failed_stage = "decompose";
      stage_decompose(p, *config.decompose, top);
    }
    if (config.sensitivity) {
      failed_stage = "sensitivity";
      stage_sensitivity(p, *config.sensitivity, top);
    }
    if (config.amplify) {
      failed_stage = "amplify";
      stage_amplify(p, *config.amplify, top);
    }
    if (config.benchmark) {
      failed_stage = "benchmark";
      stage_benchmark(p, *config.benchmark, top);
    }
    if (config.bootstrap) {
      failed_stage = "bootstrap";
      stage_bootstrap(p, *config.bootstrap, top);
    }
    if (config.simulate) {
      failed_stage = "simulate";
      stage_simulate(p, *config.simulate, top);
    }
    failed_stage.clear();
  } catch (const Error& e) {
    failure = e;
  }

  top["warnings"] = warnings.all();
  if (failure) {
    ojson ej;
    ej["stage"] = failed_stage.empty() ? "config" : failed_stage;
    ej["message"] = failure->what();
    top["error"] = std::move(ej);
  } else {
    top["error"] = nullptr;
  }
  try {
    std::filesystem::create_directories(config.out_dir);
    write_report_file(out_path(config, "report.json"), top);
  } catch (const Error&) {
    // Reporting must not mask the primary failure.
  }

  if (failure) {
    if (!config.quiet) {
      std::cerr << "error";
      if (!failed_stage.empty()) std::cerr << " [" << failed_stage << "]";
      std::cerr << ": " << failure->what() << "\n";
    }
    return exit_code_for(failure->kind());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Config file parsing

namespace {

std::vector<double> parse_grid(const std::string& spec) {
  // "a:b:step" inclusive of both ends (within a half-step tolerance).
  double a = 0, b = 0, step = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0 ||
      b < a) {
    throw_config("invalid grid spec '" + spec + "' (expected a:b:step)");
  }
  std::vector<double> out;
  for (double v = a; v <= b + step * 0.5; v += step) out.push_back(v);
  return out;
}

void parse_weight_spec(const std::string& spec, WeightConfig* w) {
  if (spec == "propensity") {
    w->source = WeightSource::propensity;
  } else if (spec == "balancing") {
    w->source = WeightSource::balancing;
  } else if (spec.rfind("external:", 0) == 0) {
    w->source = WeightSource::external;
    w->external_path = spec.substr(9);
    if (w->external_path.empty()) throw_config("external weights need a path");
  } else {
    throw_config("unknown weights spec '" + spec +
                 "' (expected propensity, balancing or external:<path>)");
  }
}

void parse_dgp(const ojson& j, DgpConfig* dgp) {
  auto get_int = [&](const char* k, int* out) {
    if (j.contains(k)) *out = j[k].get<int>();
  };
  auto get_double = [&](const char* k, double* out) {
    if (j.contains(k)) *out = j[k].get<double>();
  };
  get_int("m1", &dgp->m1);
  get_int("m0", &dgp->m0);
  get_int("size_lo", &dgp->size_lo);
  get_int("size_hi", &dgp->size_hi);
  get_int("d_x", &dgp->d_x);
  get_int("d_k", &dgp->d_k);
  get_double("cluster_sd_p", &dgp->cluster_sd_p);
  get_double("cor_p_p2", &dgp->cor_p_p2);
  get_double("unit_loading_p", &dgp->unit_loading_p);
  get_double("unit_cluster_sd", &dgp->unit_cluster_sd);
  get_double("unit_noise_sd", &dgp->unit_noise_sd);
  get_double("overlap_c", &dgp->overlap_c);
  get_double("z_threshold", &dgp->z_threshold);
  get_double("intercept_beta0", &dgp->intercept_beta0);
  get_double("noise_sd", &dgp->noise_sd);
  get_double("random_intercept_sd", &dgp->random_intercept_sd);
  get_double("tau_sd_multiplier", &dgp->tau_sd_multiplier);
  if (j.contains("seed")) dgp->seed = j["seed"].get<std::uint64_t>();
  if (j.contains("ps_coefficients")) {
    dgp->ps_coefficients = j["ps_coefficients"].get<std::vector<double>>();
  }
  if (j.contains("outcome_coeffs")) {
    dgp->outcome_coeffs = j["outcome_coeffs"].get<std::vector<double>>();
  }
}

void parse_analysis_entry(const ojson& e, AnalysisConfig* c) {
  if (e.is_string()) {
    const std::string name = e.get<std::string>();
    if (name == "load-check") c->want_load_check = true;
    else if (name == "balance") c->want_balance = true;
    else if (name == "estimate") c->want_estimate = true;
    else throw_config("analysis '" + name + "' needs an options object");
    return;
  }
  if (!e.is_object() || e.size() != 1) {
    throw_config("each analyses entry must be a string or a one-key object");
  }
  const std::string name = e.begin().key();
  const ojson& opts = e.begin().value();
  if (name == "decompose") {
    DecomposeRequest r;
    if (opts.contains("treat_as_v")) {
      r.treat_as_v = opts["treat_as_v"].get<std::vector<std::string>>();
    }
    if (opts.contains("treat_as_u")) {
      r.treat_as_u = opts["treat_as_u"].get<std::vector<std::string>>();
    }
    c->decompose = std::move(r);
  } else if (name == "sensitivity") {
    SensitivityRequest r;
    if (opts.contains("model")) {
      r.model = sens_model_from_string(opts["model"].get<std::string>());
    }
    if (opts.contains("params")) r.params = opts["params"].get<std::vector<double>>();
    if (opts.contains("grid")) {
      auto g = parse_grid(opts["grid"].get<std::string>());
      r.params.insert(r.params.end(), g.begin(), g.end());
    }
    if (opts.contains("threshold")) r.threshold = opts["threshold"].get<bool>();
    if (opts.contains("emit_plot")) r.emit_plot = opts["emit_plot"].get<bool>();
    c->sensitivity = std::move(r);
  } else if (name == "amplify") {
    AmplifyRequest r;
    if (opts.contains("model")) {
      r.model = sens_model_from_string(opts["model"].get<std::string>());
    }
    if (!opts.contains("total")) throw_config("amplify needs a 'total'");
    r.total = opts["total"].get<double>();
    if (opts.contains("grid_size")) r.grid_size = opts["grid_size"].get<int>();
    c->amplify = std::move(r);
  } else if (name == "benchmark") {
    BenchmarkRequest r;
    if (opts.contains("omit")) {
      for (const auto& s : opts["omit"]) {
        r.subsets.push_back(s.get<std::vector<std::string>>());
      }
    }
    c->benchmark = std::move(r);
  } else if (name == "bootstrap") {
    BootstrapRequest r;
    if (opts.contains("B")) r.B = opts["B"].get<int>();
    if (opts.contains("level")) r.level = opts["level"].get<double>();
    if (opts.contains("statistic")) r.statistic = opts["statistic"].get<std::string>();
    if (opts.contains("param")) r.param = opts["param"].get<double>();
    c->bootstrap = std::move(r);
  } else if (name == "simulate") {
    SimulateRequest r;
    if (opts.contains("study")) r.study = opts["study"].get<int>();
    if (opts.contains("reps")) r.options.replications = opts["reps"].get<int>();
    if (opts.contains("c")) r.options.c_values = opts["c"].get<std::vector<double>>();
    if (opts.contains("B")) r.options.B = opts["B"].get<int>();
    if (opts.contains("dgp")) parse_dgp(opts["dgp"], &r.dgp);
    if (r.study != 1 && r.study != 2) throw_config("simulate study must be 1 or 2");
    c->simulate = std::move(r);
  } else {
    throw_config("unknown analysis '" + name + "'");
  }
}

}  // namespace

AnalysisConfig AnalysisConfig::from_json_file(const std::string& path) {
  ojson j = load_json_file(path);
  AnalysisConfig c;
  if (j.contains("data")) c.data_path = j["data"].get<std::string>();
  if (j.contains("schema")) c.schema_path = j["schema"].get<std::string>();
  if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("quiet")) c.quiet = j["quiet"].get<bool>();
  if (j.contains("conditioning")) {
    c.weights.conditioning = conditioning_from_string(j["conditioning"].get<std::string>());
  }
  if (j.contains("estimand")) {
    c.weights.estimand = estimand_from_string(j["estimand"].get<std::string>());
  }
  if (j.contains("weights")) parse_weight_spec(j["weights"].get<std::string>(), &c.weights);
  if (j.contains("ridge")) c.weights.propensity.ridge = j["ridge"].get<double>();
  if (j.contains("omit")) c.weights.omit = j["omit"].get<std::vector<std::string>>();
  if (j.contains("analyses")) {
    for (const auto& e : j["analyses"]) parse_analysis_entry(e, &c);
  }
  return c;
}

}  // namespace cosens
