#pragma once

#include "cosens/csv.hpp"
#include "cosens/dataset.hpp"
#include "cosens/types.hpp"
#include "cosens/weights.hpp"

namespace cosens {

struct AmplificationPoint {
  double component_v = 0.0;
  double component_u = 0.0;
};

struct AmplificationCurve {
  SensModel model = SensModel::msm;
  double total = 1.0;
  std::vector<AmplificationPoint> points;
};

// Lambda = Lambda_V * Lambda_U with Lambda_V log-spaced on [1, total].
AmplificationCurve amplify_lambda(double total, int grid_size = 21);

// R2 = 1 - (1 - R2_V)(1 - R2_U) with R2_V linear on [0, total].
AmplificationCurve amplify_r2(double total, int grid_size = 21);

struct BenchmarkEntry {
  std::vector<std::string> omitted;        // covariate names
  std::vector<CovariateLevel> levels;      // per omitted covariate
  double r2_raw = 0.0;                     // R^2_{-(b)} before the mapping
  double r2_b = 0.0;
  double lambda_b = 1.0;
  bool refit_ok = true;
  bool clamped = false;                    // raw value was negative
};

// Refits weights with each covariate subset omitted (same recipe as the base
// fit) and maps the resulting weight-variance drop and worst-case weight
// ratio into sensitivity-parameter equivalents over the control arm.
std::vector<BenchmarkEntry> benchmark(const CosDataset& ds, const WeightSet& base,
                                      const std::vector<std::vector<std::string>>& subsets,
                                      const WeightConfig& config);

// Amplification frontier at the reported threshold plus the benchmark points
// projected into (R2_V, R2_U) space by covariate level; mixed subsets carry
// both coordinates.
CsvTable benchmark_plot_data(const std::vector<BenchmarkEntry>& entries,
                             double threshold_r2, int grid_size = 41);

}  // namespace cosens
