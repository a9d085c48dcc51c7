#include "cosens/amplify.hpp"

#include <algorithm>
#include <cmath>

namespace cosens {

AmplificationCurve amplify_lambda(double total, int grid_size) {
  if (total < 1.0) throw_config("lambda total must be >= 1");
  if (grid_size < 1) throw_config("grid size must be positive");
  AmplificationCurve c;
  c.model = SensModel::msm;
  c.total = total;
  if (total == 1.0 || grid_size == 1) {
    c.points.push_back({1.0, total});
    return c;
  }
  const double log_total = std::log(total);
  for (int i = 0; i < grid_size; ++i) {
    double frac = static_cast<double>(i) / static_cast<double>(grid_size - 1);
    double v = std::exp(frac * log_total);
    if (i == 0) v = 1.0;
    if (i == grid_size - 1) v = total;
    c.points.push_back({v, total / v});
  }
  return c;
}

AmplificationCurve amplify_r2(double total, int grid_size) {
  if (total < 0.0 || total >= 1.0) throw_config("r2 total must lie in [0, 1)");
  if (grid_size < 1) throw_config("grid size must be positive");
  AmplificationCurve c;
  c.model = SensModel::vbm;
  c.total = total;
  if (total == 0.0 || grid_size == 1) {
    c.points.push_back({0.0, total});
    return c;
  }
  for (int i = 0; i < grid_size; ++i) {
    double frac = static_cast<double>(i) / static_cast<double>(grid_size - 1);
    double v = frac * total;
    if (i == grid_size - 1) v = total;
    c.points.push_back({v, 1.0 - (1.0 - total) / (1.0 - v)});
  }
  return c;
}

namespace {

struct ArmVectors {
  std::vector<double> base;
  std::vector<double> refit;
};

double variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

}  // namespace

std::vector<BenchmarkEntry> benchmark(const CosDataset& ds, const WeightSet& base,
                                      const std::vector<std::vector<std::string>>& subsets,
                                      const WeightConfig& config) {
  if (base.values.size() != ds.n()) throw_contract("weight vector does not match dataset");
  const WeightSet full = base.normalized ? base : normalize(base, ds);

  std::vector<double> full_controls;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.arm(i) == 0) full_controls.push_back(full.values[i]);
  }
  const double var_full = variance(full_controls);

  std::vector<BenchmarkEntry> out;
  for (const auto& subset : subsets) {
    BenchmarkEntry e;
    e.omitted = subset;
    for (const auto& name : subset) {
      CovariateLevel level;
      if (!ds.has_covariate(name, &level)) {
        throw_config("cannot benchmark unknown covariate '" + name + "'");
      }
      e.levels.push_back(level);
    }

    WeightConfig reduced_cfg = config;
    reduced_cfg.omit.insert(reduced_cfg.omit.end(), subset.begin(), subset.end());
    WeightSet refit;
    try {
      refit = fit_weights(ds, reduced_cfg);
    } catch (const Error&) {
      e.refit_ok = false;
      out.push_back(std::move(e));
      continue;
    }

    std::vector<double> refit_controls;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (ds.arm(i) == 0) refit_controls.push_back(refit.values[i]);
    }
    double var_reduced = variance(refit_controls);
    if (!(var_full > 0.0)) {
      e.r2_raw = 0.0;
    } else {
      e.r2_raw = 1.0 - var_reduced / var_full;
    }
    if (e.r2_raw < 0.0) {
      // Removing a covariate can raise weight variance; the mapping presumes
      // a drop, so the value is floored and flagged.
      e.r2_raw = 0.0;
      e.clamped = true;
    }
    e.r2_b = e.r2_raw / (1.0 + e.r2_raw);

    // Worst multiplicative weight error over the weighted group(s).
    e.lambda_b = 1.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      bool weighted = (config.estimand == Estimand::att) ? ds.arm(i) == 0 : true;
      if (!weighted) continue;
      double a = refit.values[i];
      double b = full.values[i];
      if (a <= 0.0 || b <= 0.0) continue;  // zero weights carry no ratio
      e.lambda_b = std::max(e.lambda_b, std::max(a / b, b / a));
    }
    out.push_back(std::move(e));
  }
  return out;
}

CsvTable benchmark_plot_data(const std::vector<BenchmarkEntry>& entries,
                             double threshold_r2, int grid_size) {
  CsvTable t;
  t.header = {"kind", "label", "r2_v", "r2_u"};
  AmplificationCurve frontier = amplify_r2(threshold_r2, grid_size);
  for (const auto& p : frontier.points) {
    t.rows.push_back({"frontier", "", format_double(p.component_v),
                      format_double(p.component_u)});
  }
  for (const auto& e : entries) {
    if (!e.refit_ok) continue;
    bool any_cluster = false, any_unit = false;
    for (auto l : e.levels) {
      (l == CovariateLevel::cluster ? any_cluster : any_unit) = true;
    }
    double r2_v = any_cluster ? e.r2_b : 0.0;
    double r2_u = any_unit ? e.r2_b : 0.0;
    std::string label;
    for (const auto& n : e.omitted) {
      if (!label.empty()) label += '+';
      label += n;
    }
    t.rows.push_back({"benchmark", label, format_double(r2_v), format_double(r2_u)});
  }
  return t;
}

}  // namespace cosens
