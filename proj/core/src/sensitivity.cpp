#include "cosens/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace cosens {

namespace {

struct GroupData {
  std::vector<double> y;
  std::vector<double> w;
};

GroupData collect_arm(const CosDataset& ds, const WeightSet& w, int arm) {
  GroupData g;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.arm(i) != arm) continue;
    g.y.push_back(ds.units()[i].y);
    g.w.push_back(w.values[i]);
  }
  return g;
}

struct Extremum {
  double value = 0.0;
  int cut = 0;  // units with the top-`cut` outcomes sit at the upper box edge
};

// Extreme of sum(w~ y)/sum(w~) over w~_i in [w_i/lambda, w_i*lambda].
// The optimum sits at a cut in outcome order: above the cut the maximizing
// assignment uses the upper edge, below it the lower edge (reversed for the
// minimum). Every cut is evaluated via prefix sums.
Extremum extreme_weighted_mean(const GroupData& g, double lambda, bool maximize) {
  const std::size_t n = g.y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.y[a] > g.y[b];  // descending outcomes
  });

  const double hi = maximize ? lambda : 1.0 / lambda;
  const double lo = maximize ? 1.0 / lambda : lambda;

  double total_wy = 0.0, total_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_wy += g.w[i] * g.y[i];
    total_w += g.w[i];
  }

  // Start with everything at the "lo" edge, then move units across the cut
  // one at a time in outcome order.
  double num = lo * total_wy;
  double den = lo * total_w;
  Extremum best{num / den, 0};
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t i = order[k];
    num += (hi - lo) * g.w[i] * g.y[i];
    den += (hi - lo) * g.w[i];
    double v = num / den;
    bool better = maximize ? (v > best.value) : (v < best.value);
    if (better) best = {v, static_cast<int>(k + 1)};
  }
  return best;
}

double unperturbed_mean(const GroupData& g) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.y.size(); ++i) {
    num += g.w[i] * g.y[i];
    den += g.w[i];
  }
  return num / den;
}

double arm_bias_factor(const ArmMoments& m, bool* flagged) {
  double cor = m.cor_wy;
  if (!m.cor_defined) {
    cor = 0.0;
    if (flagged) *flagged = true;
  }
  return std::sqrt(1.0 - cor * cor) * std::sqrt(m.var_w * m.var_y);
}

}  // namespace

MsmResult msm_bounds(const CosDataset& ds, const WeightSet& w, double lambda) {
  if (lambda < 1.0) throw_config("lambda must be >= 1");
  if (w.values.size() != ds.n()) throw_contract("weight vector does not match dataset");
  if (!w.normalized) throw_contract("msm_bounds requires Hajek-normalized weights");

  GroupData controls = collect_arm(ds, w, 0);
  GroupData treated = collect_arm(ds, w, 1);

  MsmResult r;
  r.lambda = lambda;
  r.estimand = w.estimand;

  Extremum c_max = extreme_weighted_mean(controls, lambda, true);
  Extremum c_min = extreme_weighted_mean(controls, lambda, false);

  if (w.estimand == Estimand::att) {
    double t_mean = 0.0;
    for (double y : treated.y) t_mean += y;
    t_mean /= static_cast<double>(treated.y.size());
    r.upper = t_mean - c_min.value;
    r.lower = t_mean - c_max.value;
    r.cut_upper_control = c_min.cut;
    r.cut_lower_control = c_max.cut;
  } else {
    Extremum t_max = extreme_weighted_mean(treated, lambda, true);
    Extremum t_min = extreme_weighted_mean(treated, lambda, false);
    r.upper = t_max.value - c_min.value;
    r.lower = t_min.value - c_max.value;
    r.cut_upper_control = c_min.cut;
    r.cut_lower_control = c_max.cut;
    r.cut_upper_treated = t_max.cut;
    r.cut_lower_treated = t_min.cut;
  }
  return r;
}

ThresholdResult msm_threshold(const CosDataset& ds, const WeightSet& w, double tol) {
  if (tol <= 0) throw_config("threshold tolerance must be positive");
  MsmResult base = msm_bounds(ds, w, 1.0);
  const double tau = 0.5 * (base.lower + base.upper);  // lower == upper at 1

  ThresholdResult t;
  t.model = SensModel::msm;
  if (tau == 0.0) {
    t.value = 1.0;
    t.lower_at_value = base.lower;
    t.upper_at_value = base.upper;
    return t;
  }

  auto covers_zero = [&](double lambda) {
    MsmResult r = msm_bounds(ds, w, lambda);
    return r.lower <= 0.0 && 0.0 <= r.upper;
  };

  constexpr double kLambdaCap = 1e6;
  double lo = 1.0, hi = 2.0;
  while (!covers_zero(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > kLambdaCap) {
      MsmResult r = msm_bounds(ds, w, kLambdaCap);
      t.unbounded = true;
      t.value = std::numeric_limits<double>::infinity();
      t.lower_at_value = r.lower;
      t.upper_at_value = r.upper;
      return t;
    }
  }
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (covers_zero(mid)) hi = mid;
    else lo = mid;
  }
  MsmResult r = msm_bounds(ds, w, hi);
  t.value = hi;
  t.lower_at_value = r.lower;
  t.upper_at_value = r.upper;
  return t;
}

VbmResult vbm_bound_att(const EffectEstimate& est, double r2) {
  if (r2 < 0.0 || r2 >= 1.0) throw_config("r2 must lie in [0, 1)");
  VbmResult v;
  v.r2 = r2;
  v.estimand = Estimand::att;
  double c = arm_bias_factor(est.moments.arm[0], &v.cor_flagged);
  v.bias_bound = c * std::sqrt(r2 / (1.0 - r2));
  v.lower = est.tau_hat - v.bias_bound;
  v.upper = est.tau_hat + v.bias_bound;
  return v;
}

VbmResult vbm_bound_ato(const EffectEstimate& est, double r2) {
  if (r2 < 0.0 || r2 >= 1.0) throw_config("r2 must lie in [0, 1)");
  VbmResult v;
  v.r2 = r2;
  v.estimand = Estimand::ato;
  double c = arm_bias_factor(est.moments.arm[0], &v.cor_flagged) +
             arm_bias_factor(est.moments.arm[1], &v.cor_flagged);
  v.bias_bound = c * std::sqrt(r2 / (1.0 - r2));
  v.lower = est.tau_hat - v.bias_bound;
  v.upper = est.tau_hat + v.bias_bound;
  return v;
}

VbmResult vbm_bound(const EffectEstimate& est, double r2) {
  switch (est.estimand) {
    case Estimand::att: return vbm_bound_att(est, r2);
    case Estimand::ato: return vbm_bound_ato(est, r2);
    case Estimand::ate:
      throw_config("the variance-based bound is defined for ATT and ATO only");
  }
  throw_contract("unreachable estimand");
}

ThresholdResult vbm_threshold(const EffectEstimate& est) {
  ThresholdResult t;
  t.model = SensModel::vbm;
  bool flagged = false;
  double c = 0.0;
  switch (est.estimand) {
    case Estimand::att:
      c = arm_bias_factor(est.moments.arm[0], &flagged);
      break;
    case Estimand::ato:
      c = arm_bias_factor(est.moments.arm[0], &flagged) +
          arm_bias_factor(est.moments.arm[1], &flagged);
      break;
    case Estimand::ate:
      throw_config("the variance-based threshold is defined for ATT and ATO only");
  }
  if (est.tau_hat == 0.0) {
    t.value = 0.0;
    t.lower_at_value = 0.0;
    t.upper_at_value = 0.0;
    return t;
  }
  if (c <= 0.0) {
    t.unbounded = true;
    t.value = std::numeric_limits<double>::infinity();
    t.lower_at_value = est.tau_hat;
    t.upper_at_value = est.tau_hat;
    return t;
  }
  double ratio = std::abs(est.tau_hat) / c;
  t.value = ratio * ratio / (1.0 + ratio * ratio);
  VbmResult v = vbm_bound(est, t.value);
  t.lower_at_value = v.lower;
  t.upper_at_value = v.upper;
  return t;
}

}  // namespace cosens
