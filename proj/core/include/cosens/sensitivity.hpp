#pragma once

#include "cosens/dataset.hpp"
#include "cosens/estimate.hpp"
#include "cosens/types.hpp"

namespace cosens {

struct MsmResult {
  double lambda = 1.0;
  double lower = 0.0;
  double upper = 0.0;
  Estimand estimand = Estimand::att;
  // Sorted-threshold cut positions achieving each bound, per perturbed
  // group; -1 when the group is not perturbed (treated arm under ATT).
  int cut_upper_control = -1;
  int cut_lower_control = -1;
  int cut_upper_treated = -1;
  int cut_lower_treated = -1;
};

// Worst-case interval for the weighted estimate when every weight may move
// within [w/lambda, w*lambda], solved exactly per group by the
// sorted-threshold method for Hajek ratios. ATT perturbs only the controls;
// ATO/ATE pair the extreme treated mean with the opposite control extreme.
MsmResult msm_bounds(const CosDataset& ds, const WeightSet& w, double lambda);

struct ThresholdResult {
  SensModel model = SensModel::msm;
  double value = 1.0;        // Lambda* or R2*
  double lower_at_value = 0.0;
  double upper_at_value = 0.0;
  bool unbounded = false;    // interval never covers zero
};

// Smallest lambda whose interval contains zero, by doubling then bisection
// (cap 1e6; hitting the cap sets the unbounded flag).
ThresholdResult msm_threshold(const CosDataset& ds, const WeightSet& w,
                              double tol = 1e-4);

struct VbmResult {
  double r2 = 0.0;
  double bias_bound = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  Estimand estimand = Estimand::att;
  bool cor_flagged = false;  // undefined cor(w, Y) treated as 0
};

// Closed-form maximum-bias bounds under the variance-based model:
//   ATT: sqrt(1-cor^2(w,Y|A=0)) sqrt(R2/(1-R2) var(w|0) var(Y|0))
//   ATO: the same expression summed over both arms.
VbmResult vbm_bound_att(const EffectEstimate& est, double r2);
VbmResult vbm_bound_ato(const EffectEstimate& est, double r2);
VbmResult vbm_bound(const EffectEstimate& est, double r2);  // dispatch

// Closed-form inversion: with C the r2-free factor and t = |tau|/C,
// R2* = t^2 / (1 + t^2).
ThresholdResult vbm_threshold(const EffectEstimate& est);

}  // namespace cosens
