#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cosens/dataset.hpp"
#include "cosens/rng.hpp"
#include "cosens/types.hpp"
#include "cosens/weights.hpp"

namespace cosens {

// Synthetic clustered DGP. Treatment is assigned at the cluster level from a
// latent score Z* = e/c + Unif(-.5, .5), treated iff Z* > z_threshold, so the
// exact assignment propensity 0.5 - z_threshold + e/c is known and oracle
// weights are available. The cluster score e is logistic in the cluster
// covariates plus the cluster means of the unit covariates R and M (cluster
// covariates may summarize unit ones), so omitting either the test-score
// group {P, P2} or the unit pair {R, M} is genuine misspecification.
// Outcomes follow
//   y0 = beta0 + c_R R + c_M M + c_P P + b_j + Normal(0, noise_sd^2),
//   y1 = y0 + tau,  tau = tau_sd_multiplier * sd(y0).
// R and M carry their own cluster effects (plus an optional P loading), which
// gives the outcome a nontrivial ICC.
struct DgpConfig {
  int m1 = 18;  // together with m0 sets the cluster count
  int m0 = 26;
  int size_lo = 50;  // cluster sizes uniform on [size_lo, size_hi]
  int size_hi = 120;
  int d_x = 2;  // unit covariates: R, M, then pure-noise X3..
  int d_k = 2;  // cluster covariates: P, P2, then pure-noise K3..

  double cluster_sd_p = 1.6;   // scale of the (P, P2) pair
  double cor_p_p2 = 0.6;       // correlation of P2 with P
  double unit_loading_p = 0.0; // optional P loading inside R and M
  double unit_cluster_sd = 1.45;
  double unit_noise_sd = 1.5;

  // True cluster-level propensity coefficients over
  // [1, cluster covariates..., mean(R), mean(M)].
  std::vector<double> ps_coefficients = {-1.35, 0.62, 0.35, 1.45, 1.45};
  double overlap_c = 10.0;  // 1, 5, 10: poor, moderate, good overlap
  double z_threshold = 0.25;

  std::vector<double> outcome_coeffs = {2.5, 2.5, 1.9};  // R, M, P
  double intercept_beta0 = 10.0;
  double noise_sd = 12.0;
  double random_intercept_sd = 1.1;
  double tau_sd_multiplier = 0.3;

  std::uint64_t seed = 20260809;

  void validate() const;
  std::vector<std::string> unit_names() const;
  std::vector<std::string> cluster_names() const;
};

enum class MisspecPattern { omit_unit, omit_cluster };
const char* to_string(MisspecPattern p);
// Covariates dropped from the misspecified fit: R, M for omit_unit;
// the P test-score group (P, P2) for omit_cluster.
std::vector<std::string> pattern_columns(MisspecPattern p);

struct BasePopulation {
  std::vector<std::string> cluster_ids;
  std::vector<std::size_t> sizes;
  std::vector<std::vector<double>> k;      // per cluster
  std::vector<std::size_t> unit_cluster;   // per unit
  std::vector<std::vector<double>> x;      // per unit
  std::vector<std::string> x_names, k_names;
};

BasePopulation generate_base_population(const DgpConfig& cfg, std::uint64_t seed);

struct TreatmentDraw {
  std::vector<int> a;           // per cluster
  std::vector<double> e_hat;    // cluster-covariate propensity component
  std::vector<double> true_pi;  // exact assignment propensity, clipped
};

// Retries the uniform draws (up to 100 times) when a draw leaves an arm empty.
TreatmentDraw assign_treatment(const BasePopulation& pop, const DgpConfig& cfg,
                               RngStream& rng);

struct SimDraw {
  CosDataset ds;
  std::vector<double> true_propensity;  // per unit
  double tau_truth = 0.0;
};

SimDraw generate_outcomes(const BasePopulation& pop, const TreatmentDraw& treat,
                          const DgpConfig& cfg, RngStream& rng);

// All three stages with sub-streams derived from `seed`.
SimDraw simulate_draw(const DgpConfig& cfg, std::uint64_t seed);

// ATT weights from the exact assignment propensities, Hajek-normalized.
WeightSet oracle_att_weights(const SimDraw& draw);

// Oracle sensitivity parameters of a misspecified weight vector against the
// true-propensity weights, over the weighted group (controls for ATT):
//   r2 = max(0, 1 - var(w_misspec)/var(w_star)),  clamped below 1
//   lambda = max_i max(w_misspec/w_star, w_star/w_misspec).
struct OracleParams {
  double r2 = 0.0;
  double lambda = 1.0;
};
OracleParams oracle_parameters(const WeightSet& misspec, const WeightSet& star,
                               const CosDataset& ds);

// One-way ANOVA intraclass correlation of the outcome, clamped to [0, 1].
double icc(const CosDataset& ds);

struct SimRecord {
  double c = 0.0;
  MisspecPattern pattern = MisspecPattern::omit_unit;
  int rep = 0;
  bool ok = false;
  double tau_truth = 0.0, tau_hat = 0.0;
  double r2_oracle = 0.0, lambda_oracle = 1.0;
  double msm_lower = 0.0, msm_upper = 0.0;
  double vbm_lower = 0.0, vbm_upper = 0.0;
  bool msm_covers = false, vbm_covers = false;
  bool has_bootstrap = false;
  double msm_boot_lower = 0.0, msm_boot_upper = 0.0;
  double vbm_boot_lower = 0.0, vbm_boot_upper = 0.0;
  bool msm_boot_covers = false, vbm_boot_covers = false;
  int boot_failures = 0;
};

struct SimConditionSummary {
  double c = 0.0;
  MisspecPattern pattern = MisspecPattern::omit_unit;
  int replications = 0, used = 0, failures = 0;
  double msm_coverage = 0.0, vbm_coverage = 0.0;
  double msm_mean_length = 0.0, vbm_mean_length = 0.0;
  bool has_bootstrap = false;
  double msm_boot_coverage = 0.0, vbm_boot_coverage = 0.0;
};

struct SimReport {
  int study = 1;
  std::vector<SimConditionSummary> conditions;
  std::vector<SimRecord> records;
};

struct SimOptions {
  int replications = 200;
  std::vector<double> c_values = {1.0, 5.0, 10.0};
  std::vector<MisspecPattern> patterns = {MisspecPattern::omit_unit,
                                          MisspecPattern::omit_cluster};
  WeightSource source = WeightSource::propensity;
  int B = 200;          // sim2 bootstrap replicates
  double level = 0.95;  // sim2 bootstrap level
};

// Study 1: coverage and length of the oracle-parameter bounds under both
// misspecification patterns and the requested overlap levels.
SimReport run_sim1(const DgpConfig& cfg, const SimOptions& options);

// Study 2: block-bootstrap percentile confidence intervals around the bound
// endpoints; defaults to good overlap (c = 10).
SimReport run_sim2(const DgpConfig& cfg, const SimOptions& options);

}  // namespace cosens
