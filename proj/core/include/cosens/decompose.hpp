#pragma once

#include <array>

#include "cosens/dataset.hpp"
#include "cosens/types.hpp"

namespace cosens {

// R-squared values are clamped below this ceiling so sqrt(R2/(1-R2)) stays
// finite; the clamp is flagged in the report.
inline constexpr double kR2Ceiling = 1.0 - 1e-12;

// Nested weight fits: reduced omits both confounders, mid omits only the
// unit-level one, full omits neither. Same estimand, same length, all
// normalized on the same groups.
struct WeightTriple {
  WeightSet reduced;
  WeightSet mid;
  WeightSet full;
};

struct DecompositionReport {
  Estimand estimand = Estimand::att;
  // Indexed by arm; ATT uses only arm 0 (controls).
  std::array<double, 2> r2_v{0.0, 0.0};
  std::array<double, 2> r2_u{0.0, 0.0};
  std::array<double, 2> cor_v{0.0, 0.0};
  std::array<double, 2> cor_u{0.0, 0.0};
  std::array<double, 2> scale{0.0, 0.0};  // sqrt(var(Y|a) var(w_reduced|a))
  std::array<bool, 2> arm_used{false, false};
  double cluster_term = 0.0;
  double unit_term = 0.0;
  double total_bias = 0.0;
  // |total_bias - cov(w_reduced - w_full, Y | arm structure)|; exact in
  // algebra for triples with the nested projection structure.
  double identity_residual = 0.0;
  bool clamped = false;
};

// Residual imbalance of the coarser fit relative to the finer one:
// var(w_coarse - w_fine | arm) / var(w_fine | arm), clamped to [0, ceiling).
double residual_imbalance_r2(const std::vector<double>& w_coarse_arm,
                             const std::vector<double>& w_fine_arm);
double residual_imbalance_r2(const WeightSet& coarse, const WeightSet& fine,
                             const CosDataset& ds, int arm);

// One arm's assembled bias pieces:
//   prefactor sqrt(1/(1-r2_v)),
//   cluster core cor_v * sqrt(r2_v),
//   unit core cor_u * sqrt(r2_u/(1-r2_u)),
// each scaled by sqrt(var(Y|a) var(w_reduced|a)).
struct BiasTerms {
  double cluster = 0.0;
  double unit = 0.0;
  double total = 0.0;
};
BiasTerms assemble_bias_terms(double r2_v, double r2_u, double cor_v,
                              double cor_u, double scale);

DecompositionReport att_bias_decomposition(const WeightTriple& t,
                                           const CosDataset& ds);
DecompositionReport ato_bias_decomposition(const WeightTriple& t,
                                           const CosDataset& ds);

// Composes oracle weights from reduced scores and the two imbalance ratios
// and returns the max relative deviation from independently supplied oracle
// weights. ATT: w* = [pi/(1-pi)] rV rU on controls (treated weight 1).
// ATO: pi* = pi rV rU, control w* = pi*, treated w* = 1 - pi*.
double oracle_weight_factorization_check(const std::vector<double>& pi_reduced,
                                         const std::vector<double>& ratio_v,
                                         const std::vector<double>& ratio_u,
                                         const std::vector<double>& oracle_weights,
                                         const std::vector<int>& arms,
                                         Estimand estimand);

// Diagnostics for the weighting-validity conditions: per-group mean agreement
// and, on discrete data, the worst stratum-level projection residual
// |E(w*|stratum) - w(stratum)| over the weighted group(s).
struct ValidityCheck {
  double mean_match = 0.0;
  double projection_residual = 0.0;
};
ValidityCheck validity_conditions_check(const WeightSet& w, const WeightSet& w_star,
                                        const CosDataset& ds);

}  // namespace cosens
