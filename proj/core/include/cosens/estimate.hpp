#pragma once

#include "cosens/dataset.hpp"
#include "cosens/types.hpp"

namespace cosens {

// Unweighted within-arm moments (1/n convention). Every bound formula
// consumes these.
struct ArmMoments {
  double mean_y = 0.0;
  double var_y = 0.0;
  double var_w = 0.0;
  double cor_wy = 0.0;
  std::size_t n = 0;
  bool cor_defined = true;  // false when var_w or var_y is zero
};

struct GroupMoments {
  ArmMoments arm[2];  // indexed by treatment arm
};

struct EffectEstimate {
  Estimand estimand = Estimand::att;
  double tau_hat = 0.0;
  GroupMoments moments;
  WeightSource weight_source = WeightSource::propensity;
  std::optional<Conditioning> conditioning;
  bool clip_warning = false;
};

// Weighted point estimate. ATT: mean(Y | treated) - (1/n0) sum_C w Y.
// ATO/ATE: (1/n1) sum_T w Y - (1/n0) sum_C w Y. Requires normalized weights.
EffectEstimate point_estimate(const CosDataset& ds, const WeightSet& w);

// Per-arm var(Y), var(w) and Pearson cor(w, Y); arms need >= 2 units.
GroupMoments group_moments(const CosDataset& ds, const WeightSet& w);

}  // namespace cosens
