#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cosens/dataset.hpp"
#include "cosens/types.hpp"

namespace cosens {

// Fitted scores are clipped into [kScoreClip, 1 - kScoreClip]; ATT-style
// ratios explode at the boundary, so any clip is recorded as a flag.
inline constexpr double kScoreClip = 1e-6;

// Coefficient magnitude treated as separation when fitting without ridge.
inline constexpr double kSeparationBound = 30.0;

struct PropensityOptions {
  int max_iter = 100;
  double tol = 1e-8;   // max absolute coefficient change
  double ridge = 0.0;
  // Scores are clipped into [score_trim, 1 - score_trim]. The default is the
  // bare numerical clip; larger values give conventional trimmed/truncated
  // propensity weights (the simulation studies trim at 0.02 to stabilize
  // ATT weights under poor overlap).
  double score_trim = kScoreClip;
};

struct PropensityFit {
  Conditioning conditioning = Conditioning::cud;
  std::vector<std::string> design_names;  // includes "(intercept)"
  std::vector<double> coefficients;
  std::vector<double> scores;  // per unit, strictly inside (0, 1)
  bool converged = false;
  int iterations = 0;
  bool any_clipped = false;
  std::vector<int> arms;  // per-unit treatment, carried for weight transforms
};

// Unit-level logistic regression of cluster treatment on the conditioning
// design, by iteratively reweighted least squares. `omit` drops named
// covariates from the design (used by benchmarking and the simulations).
PropensityFit fit_propensity(const CosDataset& ds, Conditioning conditioning,
                             const PropensityOptions& options = {});
PropensityFit fit_propensity(const CosDataset& ds, Conditioning conditioning,
                             const std::vector<std::string>& omit,
                             const PropensityOptions& options = {});

// Estimand transforms of fitted scores. Raw forms:
//   ATT: controls pi/(1-pi), treated 1
//   ATO: controls pi, treated 1-pi
//   ATE: treated 1/pi, controls 1/(1-pi)
// With hajek_normalize the result is rescaled to mean 1 per weighted group.
WeightSet weights_from_propensity(const PropensityFit& fit, Estimand estimand,
                                  bool hajek_normalize = true);

struct BalanceOptions {
  double tol = 1e-6;  // raw-scale first-moment balance
  int max_iter = 20000;
  double step = 1.0;  // initial gradient step
};

// Entropy balancing of controls to the treated means of [K, X]: control
// weights proportional to exp(theta'z), theta from the convex dual by
// gradient descent with backtracking. ATT only; ATO requests are rejected
// (use propensity-based ATO weights).
WeightSet balancing_weights(const CosDataset& ds, Estimand estimand,
                            const BalanceOptions& options = {});
WeightSet balancing_weights(const CosDataset& ds, Estimand estimand,
                            const std::vector<std::string>& omit,
                            const BalanceOptions& options = {});

// Rescales each weighted group to average 1 (controls for ATT; treated and
// controls separately for ATO/ATE). Treated ATT weights are pinned at 1.
WeightSet normalize(const WeightSet& w, const CosDataset& ds);

// External weights CSV with columns (unit_id, weight); every unit must appear.
WeightSet load_external_weights(const std::string& csv_path, const CosDataset& ds,
                                Estimand estimand);

// Weight-construction recipe, reusable by bootstrap replicates and
// benchmarking refits.
struct WeightConfig {
  WeightSource source = WeightSource::propensity;
  Conditioning conditioning = Conditioning::cud;
  Estimand estimand = Estimand::att;
  PropensityOptions propensity;
  BalanceOptions balance;
  std::vector<std::string> omit;  // covariates dropped before fitting
  std::string external_path;
};

// Fits weights per the recipe and returns them Hajek-normalized.
WeightSet fit_weights(const CosDataset& ds, const WeightConfig& config);

}  // namespace cosens
