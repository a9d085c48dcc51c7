#include "cosens/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cosens {

namespace {

struct Moments2 {
  double mean_a = 0.0, mean_b = 0.0;
  double var_a = 0.0, var_b = 0.0, cov = 0.0;  // 1/n convention
  std::size_t n = 0;
};

Moments2 moments2(const std::vector<double>& a, const std::vector<double>& b) {
  Moments2 m;
  m.n = a.size();
  const double n = static_cast<double>(m.n);
  for (std::size_t i = 0; i < a.size(); ++i) {
    m.mean_a += a[i];
    m.mean_b += b[i];
  }
  m.mean_a /= n;
  m.mean_b /= n;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - m.mean_a;
    double db = b[i] - m.mean_b;
    m.var_a += da * da;
    m.var_b += db * db;
    m.cov += da * db;
  }
  m.var_a /= n;
  m.var_b /= n;
  m.cov /= n;
  return m;
}

double variance(const std::vector<double>& v) {
  return moments2(v, v).var_a;
}

double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  return moments2(a, b).cov;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  Moments2 m = moments2(a, b);
  if (m.var_a <= 0.0 || m.var_b <= 0.0) return 0.0;
  return std::clamp(m.cov / std::sqrt(m.var_a * m.var_b), -1.0, 1.0);
}

std::vector<double> restrict_to_arm(const std::vector<double>& v,
                                    const CosDataset& ds, int arm) {
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (ds.arm(i) == arm) out.push_back(v[i]);
  }
  return out;
}

void check_triple(const WeightTriple& t, const CosDataset& ds, Estimand expected) {
  const std::size_t n = ds.n();
  if (t.reduced.values.size() != n || t.mid.values.size() != n ||
      t.full.values.size() != n) {
    throw_contract("weight triple does not match dataset");
  }
  if (t.reduced.estimand != expected || t.mid.estimand != expected ||
      t.full.estimand != expected) {
    throw_contract("weight triple estimands do not match the decomposition");
  }
  if (!t.reduced.normalized || !t.mid.normalized || !t.full.normalized) {
    throw_contract("weight triple must be normalized on the same groups");
  }
}

struct ArmDecomposition {
  double r2_v = 0.0, r2_u = 0.0, cor_v = 0.0, cor_u = 0.0, scale = 0.0;
  bool clamped = false;
  BiasTerms terms;
  double cov_oracle = 0.0;  // cov(w_reduced - w_full, Y | arm)
};

ArmDecomposition decompose_arm(const WeightTriple& t, const CosDataset& ds, int arm) {
  std::vector<double> red = restrict_to_arm(t.reduced.values, ds, arm);
  std::vector<double> mid = restrict_to_arm(t.mid.values, ds, arm);
  std::vector<double> full = restrict_to_arm(t.full.values, ds, arm);
  if (red.size() < 2) {
    throw_numeric("arm " + std::to_string(arm) + " has fewer than 2 units");
  }
  std::vector<double> y;
  y.reserve(red.size());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.arm(i) == arm) y.push_back(ds.units()[i].y);
  }

  std::vector<double> eps_v(red.size()), eps_u(red.size()), delta(red.size());
  for (std::size_t i = 0; i < red.size(); ++i) {
    eps_v[i] = red[i] - mid[i];
    eps_u[i] = mid[i] - full[i];
    delta[i] = red[i] - full[i];
  }

  ArmDecomposition d;
  d.r2_v = residual_imbalance_r2(red, mid);
  d.r2_u = residual_imbalance_r2(mid, full);
  d.clamped = (d.r2_v >= kR2Ceiling) || (d.r2_u >= kR2Ceiling);
  d.cor_v = correlation(eps_v, y);
  d.cor_u = correlation(eps_u, y);
  d.scale = std::sqrt(variance(y) * variance(red));
  d.terms = assemble_bias_terms(d.r2_v, d.r2_u, d.cor_v, d.cor_u, d.scale);
  d.cov_oracle = covariance(delta, y);
  return d;
}

}  // namespace

double residual_imbalance_r2(const std::vector<double>& w_coarse_arm,
                             const std::vector<double>& w_fine_arm) {
  if (w_coarse_arm.size() != w_fine_arm.size()) {
    throw_contract("weight vectors differ in length");
  }
  double var_fine = variance(w_fine_arm);
  if (var_fine <= 0.0) {
    throw_numeric("residual imbalance undefined: finer weights have zero variance");
  }
  std::vector<double> diff(w_coarse_arm.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = w_coarse_arm[i] - w_fine_arm[i];
  }
  double r2 = variance(diff) / var_fine;
  return std::clamp(r2, 0.0, kR2Ceiling);
}

double residual_imbalance_r2(const WeightSet& coarse, const WeightSet& fine,
                             const CosDataset& ds, int arm) {
  return residual_imbalance_r2(restrict_to_arm(coarse.values, ds, arm),
                               restrict_to_arm(fine.values, ds, arm));
}

BiasTerms assemble_bias_terms(double r2_v, double r2_u, double cor_v,
                              double cor_u, double scale) {
  double prefactor = std::sqrt(1.0 / (1.0 - r2_v));
  BiasTerms t;
  t.cluster = prefactor * cor_v * std::sqrt(r2_v) * scale;
  t.unit = prefactor * cor_u * std::sqrt(r2_u / (1.0 - r2_u)) * scale;
  t.total = t.cluster + t.unit;
  return t;
}

DecompositionReport att_bias_decomposition(const WeightTriple& t,
                                           const CosDataset& ds) {
  check_triple(t, ds, Estimand::att);
  ArmDecomposition d = decompose_arm(t, ds, 0);

  DecompositionReport r;
  r.estimand = Estimand::att;
  r.arm_used = {true, false};
  r.r2_v[0] = d.r2_v;
  r.r2_u[0] = d.r2_u;
  r.cor_v[0] = d.cor_v;
  r.cor_u[0] = d.cor_u;
  r.scale[0] = d.scale;
  r.clamped = d.clamped;
  r.cluster_term = d.terms.cluster;
  r.unit_term = d.terms.unit;
  r.total_bias = d.terms.total;
  r.identity_residual = std::abs(r.total_bias - d.cov_oracle);
  return r;
}

DecompositionReport ato_bias_decomposition(const WeightTriple& t,
                                           const CosDataset& ds) {
  check_triple(t, ds, Estimand::ato);
  ArmDecomposition d1 = decompose_arm(t, ds, 1);
  ArmDecomposition d0 = decompose_arm(t, ds, 0);

  DecompositionReport r;
  r.estimand = Estimand::ato;
  r.arm_used = {true, true};
  r.r2_v = {d0.r2_v, d1.r2_v};
  r.r2_u = {d0.r2_u, d1.r2_u};
  r.cor_v = {d0.cor_v, d1.cor_v};
  r.cor_u = {d0.cor_u, d1.cor_u};
  r.scale = {d0.scale, d1.scale};
  r.clamped = d0.clamped || d1.clamped;
  // Treated-arm block enters with +, control-arm block with -.
  r.cluster_term = d1.terms.cluster - d0.terms.cluster;
  r.unit_term = d1.terms.unit - d0.terms.unit;
  r.total_bias = r.cluster_term + r.unit_term;
  r.identity_residual = std::abs(r.total_bias - (d1.cov_oracle - d0.cov_oracle));
  return r;
}

double oracle_weight_factorization_check(const std::vector<double>& pi_reduced,
                                         const std::vector<double>& ratio_v,
                                         const std::vector<double>& ratio_u,
                                         const std::vector<double>& oracle_weights,
                                         const std::vector<int>& arms,
                                         Estimand estimand) {
  const std::size_t n = pi_reduced.size();
  if (ratio_v.size() != n || ratio_u.size() != n || oracle_weights.size() != n ||
      arms.size() != n) {
    throw_contract("factorization inputs differ in length");
  }
  if (estimand == Estimand::ate) {
    throw_config("factorization check supports ATT and ATO only");
  }
  double max_rel = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ratio_v[i] > 0.0) || !(ratio_u[i] > 0.0)) {
      throw_numeric("imbalance ratios must be strictly positive");
    }
    double composed;
    if (estimand == Estimand::att) {
      composed = arms[i] == 1
                     ? 1.0
                     : pi_reduced[i] / (1.0 - pi_reduced[i]) * ratio_v[i] * ratio_u[i];
    } else {
      double pi_star = pi_reduced[i] * ratio_v[i] * ratio_u[i];
      if (!(pi_star > 0.0) || !(pi_star < 1.0)) {
        throw_numeric("composed oracle score lies outside (0, 1)");
      }
      composed = arms[i] == 1 ? 1.0 - pi_star : pi_star;
    }
    double denom = std::max(std::abs(oracle_weights[i]), 1e-300);
    max_rel = std::max(max_rel, std::abs(composed - oracle_weights[i]) / denom);
  }
  return max_rel;
}

ValidityCheck validity_conditions_check(const WeightSet& w, const WeightSet& w_star,
                                        const CosDataset& ds) {
  if (w.values.size() != ds.n() || w_star.values.size() != ds.n()) {
    throw_contract("weight vectors do not match dataset");
  }
  std::vector<int> weighted_arms;
  if (w.estimand == Estimand::att) weighted_arms = {0};
  else weighted_arms = {0, 1};

  ValidityCheck out;
  for (int arm : weighted_arms) {
    std::vector<double> wa = restrict_to_arm(w.values, ds, arm);
    std::vector<double> sa = restrict_to_arm(w_star.values, ds, arm);
    double mw = 0.0, ms = 0.0;
    for (std::size_t i = 0; i < wa.size(); ++i) {
      mw += wa[i];
      ms += sa[i];
    }
    mw /= static_cast<double>(wa.size());
    ms /= static_cast<double>(sa.size());
    out.mean_match = std::max(out.mean_match, std::abs(ms - mw));

    // Strata keyed on the exact observed covariate tuple; meaningful on
    // discrete synthetic data, where the keys collide exactly.
    std::map<std::vector<double>, std::pair<std::vector<double>, std::vector<double>>>
        strata;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (ds.arm(i) != arm) continue;
      std::vector<double> key = ds.units()[i].x;
      const auto& k = ds.clusters()[ds.cluster_index(i)].k;
      key.insert(key.end(), k.begin(), k.end());
      auto& bucket = strata[key];
      bucket.first.push_back(w_star.values[i]);
      bucket.second.push_back(w.values[i]);
    }
    for (const auto& [key, bucket] : strata) {
      double s_mean = 0.0, w_mean = 0.0;
      for (double v : bucket.first) s_mean += v;
      for (double v : bucket.second) w_mean += v;
      s_mean /= static_cast<double>(bucket.first.size());
      w_mean /= static_cast<double>(bucket.second.size());
      out.projection_residual =
          std::max(out.projection_residual, std::abs(s_mean - w_mean));
    }
  }
  return out;
}

}  // namespace cosens
