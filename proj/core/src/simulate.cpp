#include "cosens/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "cosens/bootstrap.hpp"
#include "cosens/decompose.hpp"
#include "cosens/estimate.hpp"
#include "cosens/sensitivity.hpp"

namespace cosens {

namespace {

constexpr std::uint64_t kTagPopulation = 0x706f70ull;
constexpr std::uint64_t kTagTreatment = 0x747274ull;
constexpr std::uint64_t kTagOutcome = 0x6f7574ull;
constexpr std::uint64_t kTagBootstrap = 0x626f74ull;

// The studies' propensity fits use conventional trimming so ATT weights stay
// bounded under poor overlap.
constexpr double kSimScoreTrim = 0.02;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

std::uint64_t replicate_seed(const DgpConfig& cfg, int study, std::size_t cond,
                             int rep) {
  RngStream s = RngStream::derive(cfg.seed, {static_cast<std::uint64_t>(study), cond,
                                             static_cast<std::uint64_t>(rep)});
  return s.next_u64();
}

}  // namespace

void DgpConfig::validate() const {
  if (m1 < 1 || m0 < 1) throw_config("cluster counts must be >= 1");
  if (size_lo < 1 || size_hi < size_lo) throw_config("invalid cluster size range");
  if (d_x < 2) throw_config("the DGP needs at least the R and M unit covariates");
  if (d_k < 2) throw_config("the DGP needs at least the P and P2 cluster covariates");
  if (ps_coefficients.size() != static_cast<std::size_t>(d_k) + 3) {
    throw_config(
        "ps_coefficients must have length 1 + d_k + 2 "
        "([1, cluster covariates, mean(R), mean(M)])");
  }
  if (!(overlap_c > 0)) throw_config("overlap_c must be positive");
  if (!(noise_sd > 0)) throw_config("noise_sd must be positive");
  if (outcome_coeffs.size() != 3) throw_config("outcome_coeffs must be (R, M, P)");
  if (!(std::abs(cor_p_p2) <= 1.0)) throw_config("cor_p_p2 must lie in [-1, 1]");
}

std::vector<std::string> DgpConfig::unit_names() const {
  std::vector<std::string> names = {"R", "M"};
  for (int j = 3; j <= d_x; ++j) names.push_back("X" + std::to_string(j));
  return names;
}

std::vector<std::string> DgpConfig::cluster_names() const {
  std::vector<std::string> names = {"P", "P2"};
  for (int j = 3; j <= d_k; ++j) names.push_back("K" + std::to_string(j));
  return names;
}

const char* to_string(MisspecPattern p) {
  return p == MisspecPattern::omit_unit ? "omit_unit" : "omit_cluster";
}

std::vector<std::string> pattern_columns(MisspecPattern p) {
  if (p == MisspecPattern::omit_unit) return {"R", "M"};
  return {"P", "P2"};
}

BasePopulation generate_base_population(const DgpConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RngStream rng = RngStream::derive(seed, {kTagPopulation});

  const int m = cfg.m1 + cfg.m0;
  BasePopulation pop;
  pop.x_names = cfg.unit_names();
  pop.k_names = cfg.cluster_names();

  // Per-cluster effects feeding R and M.
  std::vector<double> g_r(m), g_m(m);
  const double rho = cfg.cor_p_p2;
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  for (int c = 0; c < m; ++c) {
    pop.cluster_ids.push_back("c" + std::to_string(c + 1));
    pop.sizes.push_back(static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(cfg.size_lo),
                        static_cast<std::int64_t>(cfg.size_hi))));
    std::vector<double> k(static_cast<std::size_t>(cfg.d_k));
    double z1 = rng.normal();
    double z2 = rng.normal();
    k[0] = cfg.cluster_sd_p * z1;                      // P
    k[1] = cfg.cluster_sd_p * (rho * z1 + rho_c * z2); // P2
    for (int j = 2; j < cfg.d_k; ++j) k[static_cast<std::size_t>(j)] = rng.normal();
    pop.k.push_back(std::move(k));
    g_r[c] = rng.normal(0.0, cfg.unit_cluster_sd);
    g_m[c] = rng.normal(0.0, cfg.unit_cluster_sd);
  }

  for (int c = 0; c < m; ++c) {
    const double p = pop.k[static_cast<std::size_t>(c)][0];
    for (std::size_t i = 0; i < pop.sizes[static_cast<std::size_t>(c)]; ++i) {
      std::vector<double> x(static_cast<std::size_t>(cfg.d_x));
      x[0] = cfg.unit_loading_p * p + g_r[c] + rng.normal(0.0, cfg.unit_noise_sd);
      x[1] = cfg.unit_loading_p * p + g_m[c] + rng.normal(0.0, cfg.unit_noise_sd);
      for (int j = 2; j < cfg.d_x; ++j) x[static_cast<std::size_t>(j)] = rng.normal();
      pop.x.push_back(std::move(x));
      pop.unit_cluster.push_back(static_cast<std::size_t>(c));
    }
  }
  return pop;
}

TreatmentDraw assign_treatment(const BasePopulation& pop, const DgpConfig& cfg,
                               RngStream& rng) {
  const std::size_t m = pop.cluster_ids.size();

  // Cluster means of R and M enter the propensity as cluster-level summaries.
  std::vector<double> mean_r(m, 0.0), mean_m(m, 0.0);
  std::vector<std::size_t> counts(m, 0);
  for (std::size_t i = 0; i < pop.x.size(); ++i) {
    std::size_t c = pop.unit_cluster[i];
    mean_r[c] += pop.x[i][0];
    mean_m[c] += pop.x[i][1];
    ++counts[c];
  }
  for (std::size_t c = 0; c < m; ++c) {
    mean_r[c] /= static_cast<double>(counts[c]);
    mean_m[c] /= static_cast<double>(counts[c]);
  }

  TreatmentDraw t;
  t.e_hat.resize(m);
  t.true_pi.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    double eta = cfg.ps_coefficients[0];
    for (std::size_t j = 0; j < pop.k[c].size(); ++j) {
      eta += cfg.ps_coefficients[j + 1] * pop.k[c][j];
    }
    eta += cfg.ps_coefficients[pop.k[c].size() + 1] * mean_r[c];
    eta += cfg.ps_coefficients[pop.k[c].size() + 2] * mean_m[c];
    t.e_hat[c] = sigmoid(eta);
    // P(Unif(-.5,.5) > z_threshold - e/c), the exact assignment propensity.
    double pi = 0.5 - cfg.z_threshold + t.e_hat[c] / cfg.overlap_c;
    t.true_pi[c] = std::clamp(pi, kScoreClip, 1.0 - kScoreClip);
  }

  for (int attempt = 0; attempt < 100; ++attempt) {
    t.a.assign(m, 0);
    bool any1 = false, any0 = false;
    for (std::size_t c = 0; c < m; ++c) {
      double z_star = t.e_hat[c] / cfg.overlap_c + rng.uniform(-0.5, 0.5);
      t.a[c] = z_star > cfg.z_threshold ? 1 : 0;
      (t.a[c] ? any1 : any0) = true;
    }
    if (any1 && any0) return t;
  }
  throw_numeric("treatment assignment left an arm empty in 100 attempts");
}

SimDraw generate_outcomes(const BasePopulation& pop, const TreatmentDraw& treat,
                          const DgpConfig& cfg, RngStream& rng) {
  const std::size_t m = pop.cluster_ids.size();
  const std::size_t n = pop.x.size();

  std::vector<double> intercepts(m);
  for (std::size_t c = 0; c < m; ++c) {
    intercepts[c] = rng.normal(0.0, cfg.random_intercept_sd);
  }

  std::vector<double> y0(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = pop.unit_cluster[i];
    y0[i] = cfg.intercept_beta0 + cfg.outcome_coeffs[0] * pop.x[i][0] +
            cfg.outcome_coeffs[1] * pop.x[i][1] + cfg.outcome_coeffs[2] * pop.k[c][0] +
            intercepts[c] + rng.normal(0.0, cfg.noise_sd);
    mean += y0[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y0) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double tau = cfg.tau_sd_multiplier * std::sqrt(var);

  std::vector<ClusterRecord> clusters(m);
  for (std::size_t c = 0; c < m; ++c) {
    clusters[c].cluster_id = pop.cluster_ids[c];
    clusters[c].a = treat.a[c];
    clusters[c].k = pop.k[c];
    clusters[c].n_units = pop.sizes[c];
  }
  std::vector<UnitRecord> units(n);
  std::vector<double> true_propensity(n);
  std::vector<std::size_t> within(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = pop.unit_cluster[i];
    units[i].unit_id = pop.cluster_ids[c] + "u" + std::to_string(++within[c]);
    units[i].cluster_id = pop.cluster_ids[c];
    units[i].x = pop.x[i];
    units[i].y = treat.a[c] ? y0[i] + tau : y0[i];
    true_propensity[i] = treat.true_pi[c];
  }

  SimDraw draw{CosDataset(std::move(units), std::move(clusters), pop.x_names,
                          pop.k_names),
               std::move(true_propensity), tau};
  return draw;
}

SimDraw simulate_draw(const DgpConfig& cfg, std::uint64_t seed) {
  BasePopulation pop = generate_base_population(cfg, seed);
  RngStream treat_rng = RngStream::derive(seed, {kTagTreatment});
  TreatmentDraw treat = assign_treatment(pop, cfg, treat_rng);
  RngStream out_rng = RngStream::derive(seed, {kTagOutcome});
  return generate_outcomes(pop, treat, cfg, out_rng);
}

WeightSet oracle_att_weights(const SimDraw& draw) {
  WeightSet w;
  w.estimand = Estimand::att;
  w.source = WeightSource::propensity;
  w.conditioning = Conditioning::cud;
  w.values.resize(draw.ds.n());
  for (std::size_t i = 0; i < draw.ds.n(); ++i) {
    double pi = draw.true_propensity[i];
    w.values[i] = draw.ds.arm(i) == 1 ? 1.0 : pi / (1.0 - pi);
  }
  return normalize(w, draw.ds);
}

OracleParams oracle_parameters(const WeightSet& misspec, const WeightSet& star,
                               const CosDataset& ds) {
  if (misspec.values.size() != ds.n() || star.values.size() != ds.n()) {
    throw_contract("weight vectors do not match dataset");
  }
  if (!misspec.normalized || !star.normalized) {
    throw_contract("oracle parameters require normalized weights");
  }
  std::vector<double> wm, ws;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    bool weighted = misspec.estimand == Estimand::att ? ds.arm(i) == 0 : true;
    if (!weighted) continue;
    wm.push_back(misspec.values[i]);
    ws.push_back(star.values[i]);
  }
  auto variance = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size());
  };
  double var_star = variance(ws);
  if (!(var_star > 0.0)) {
    throw_numeric("oracle weights have zero variance over the weighted group");
  }
  OracleParams p;
  p.r2 = std::clamp(1.0 - variance(wm) / var_star, 0.0, kR2Ceiling);
  p.lambda = 1.0;
  for (std::size_t i = 0; i < wm.size(); ++i) {
    if (wm[i] <= 0.0 || ws[i] <= 0.0) continue;
    p.lambda = std::max(p.lambda, std::max(wm[i] / ws[i], ws[i] / wm[i]));
  }
  return p;
}

double icc(const CosDataset& ds) {
  const std::size_t m = ds.m();
  if (m < 2) throw_numeric("ICC needs at least two clusters");
  const double n_total = static_cast<double>(ds.n());

  std::vector<double> sums(m, 0.0);
  std::vector<std::size_t> counts(m, 0);
  double grand = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    sums[ds.cluster_index(i)] += ds.units()[i].y;
    ++counts[ds.cluster_index(i)];
    grand += ds.units()[i].y;
  }
  grand /= n_total;

  double ssb = 0.0, ssw = 0.0, sum_sq_sizes = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double mean_c = sums[c] / static_cast<double>(counts[c]);
    ssb += static_cast<double>(counts[c]) * (mean_c - grand) * (mean_c - grand);
    sum_sq_sizes += static_cast<double>(counts[c]) * static_cast<double>(counts[c]);
  }
  for (std::size_t i = 0; i < ds.n(); ++i) {
    double mean_c = sums[ds.cluster_index(i)] /
                    static_cast<double>(counts[ds.cluster_index(i)]);
    ssw += (ds.units()[i].y - mean_c) * (ds.units()[i].y - mean_c);
  }
  if (ds.n() <= m) throw_numeric("ICC needs a cluster with at least two units");

  const double msb = ssb / static_cast<double>(m - 1);
  const double msw = ssw / (n_total - static_cast<double>(m));
  const double n0 = (n_total - sum_sq_sizes / n_total) / static_cast<double>(m - 1);
  double sigma_b = std::max(0.0, (msb - msw) / n0);
  double denom = sigma_b + msw;
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(sigma_b / denom, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Studies

namespace {

SimRecord run_replicate(const DgpConfig& cfg, const SimOptions& options, int study,
                        std::size_t cond_index, double c, MisspecPattern pattern,
                        int rep) {
  SimRecord rec;
  rec.c = c;
  rec.pattern = pattern;
  rec.rep = rep;

  DgpConfig draw_cfg = cfg;
  draw_cfg.overlap_c = c;
  const std::uint64_t rep_seed = replicate_seed(cfg, study, cond_index, rep);

  SimDraw draw = simulate_draw(draw_cfg, rep_seed);
  rec.tau_truth = draw.tau_truth;

  WeightConfig wcfg;
  wcfg.source = options.source;
  wcfg.conditioning = Conditioning::cud;
  wcfg.estimand = Estimand::att;
  wcfg.propensity.score_trim = kSimScoreTrim;

  // w* is the correctly specified fit (all covariates); the misspecified
  // weights refit with the designated group omitted. With nothing omitted
  // the two coincide and the oracle parameters are exactly (0, 1).
  WeightSet w_star = fit_weights(draw.ds, wcfg);
  wcfg.omit = pattern_columns(pattern);
  WeightSet w_mis = fit_weights(draw.ds, wcfg);
  OracleParams oracle = oracle_parameters(w_mis, w_star, draw.ds);
  rec.r2_oracle = oracle.r2;
  rec.lambda_oracle = oracle.lambda;

  EffectEstimate est = point_estimate(draw.ds, w_mis);
  rec.tau_hat = est.tau_hat;

  MsmResult msm = msm_bounds(draw.ds, w_mis, oracle.lambda);
  rec.msm_lower = msm.lower;
  rec.msm_upper = msm.upper;
  rec.msm_covers = msm.lower <= rec.tau_truth && rec.tau_truth <= msm.upper;

  VbmResult vbm = vbm_bound_att(est, oracle.r2);
  rec.vbm_lower = vbm.lower;
  rec.vbm_upper = vbm.upper;
  rec.vbm_covers = vbm.lower <= rec.tau_truth && rec.tau_truth <= vbm.upper;

  if (study == 2) {
    std::vector<Statistic> stats = {
        {Statistic::Kind::msm_lower, oracle.lambda},
        {Statistic::Kind::msm_upper, oracle.lambda},
        {Statistic::Kind::vbm_lower, oracle.r2},
        {Statistic::Kind::vbm_upper, oracle.r2},
    };
    const std::uint64_t boot_seed =
        RngStream::derive(rep_seed, {kTagBootstrap}).next_u64();
    std::vector<BootstrapCI> cis = block_bootstrap_multi(
        draw.ds, options.B, options.level, boot_seed, wcfg, stats);
    rec.has_bootstrap = true;
    rec.msm_boot_lower = cis[0].lower;
    rec.msm_boot_upper = cis[1].upper;
    rec.vbm_boot_lower = cis[2].lower;
    rec.vbm_boot_upper = cis[3].upper;
    rec.boot_failures = cis[0].failures;
    rec.msm_boot_covers = rec.msm_boot_lower <= rec.tau_truth &&
                          rec.tau_truth <= rec.msm_boot_upper;
    rec.vbm_boot_covers = rec.vbm_boot_lower <= rec.tau_truth &&
                          rec.tau_truth <= rec.vbm_boot_upper;
  }
  rec.ok = true;
  return rec;
}

SimReport run_study(const DgpConfig& cfg, const SimOptions& options, int study) {
  cfg.validate();
  if (options.replications < 1) throw_config("replications must be >= 1");
  SimReport report;
  report.study = study;

  std::size_t cond_index = 0;
  for (double c : options.c_values) {
    for (MisspecPattern pattern : options.patterns) {
      SimConditionSummary sum;
      sum.c = c;
      sum.pattern = pattern;
      sum.replications = options.replications;
      sum.has_bootstrap = study == 2;
      int msm_cov = 0, vbm_cov = 0, msm_boot_cov = 0, vbm_boot_cov = 0;
      double msm_len = 0.0, vbm_len = 0.0;

      for (int rep = 0; rep < options.replications; ++rep) {
        SimRecord rec;
        try {
          rec = run_replicate(cfg, options, study, cond_index, c, pattern, rep);
        } catch (const Error&) {
          rec.c = c;
          rec.pattern = pattern;
          rec.rep = rep;
          rec.ok = false;
        }
        if (rec.ok) {
          ++sum.used;
          msm_cov += rec.msm_covers;
          vbm_cov += rec.vbm_covers;
          msm_boot_cov += rec.msm_boot_covers;
          vbm_boot_cov += rec.vbm_boot_covers;
          msm_len += rec.msm_upper - rec.msm_lower;
          vbm_len += rec.vbm_upper - rec.vbm_lower;
        } else {
          ++sum.failures;
        }
        report.records.push_back(std::move(rec));
      }

      if (sum.used > 0) {
        const double used = sum.used;
        sum.msm_coverage = msm_cov / used;
        sum.vbm_coverage = vbm_cov / used;
        sum.msm_mean_length = msm_len / used;
        sum.vbm_mean_length = vbm_len / used;
        if (study == 2) {
          sum.msm_boot_coverage = msm_boot_cov / used;
          sum.vbm_boot_coverage = vbm_boot_cov / used;
        }
      }
      report.conditions.push_back(std::move(sum));
      ++cond_index;
    }
  }
  return report;
}

}  // namespace

SimReport run_sim1(const DgpConfig& cfg, const SimOptions& options) {
  return run_study(cfg, options, 1);
}

SimReport run_sim2(const DgpConfig& cfg, const SimOptions& options) {
  SimOptions opts = options;
  if (opts.c_values.size() != 1) opts.c_values = {10.0};
  return run_study(cfg, opts, 2);
}

}  // namespace cosens
