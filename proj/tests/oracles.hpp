#pragma once

// Test-side oracles, independent of the library implementation paths they
// check: brute-force moments, vertex enumeration for the box-constrained
// ratio program, a 1-d dual bisection for entropy balancing, and builders
// for small synthetic datasets and nested weight triples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cosens/dataset.hpp"
#include "cosens/rng.hpp"
#include "cosens/types.hpp"

namespace oracle {

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Two-pass population (1/n) variance.
inline double variance(const std::vector<double>& v) {
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size());
}

inline double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = mean(a), mb = mean(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size());
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  return covariance(a, b) / std::sqrt(variance(a) * variance(b));
}

inline double weighted_mean(const std::vector<double>& y, const std::vector<double>& w) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += w[i] * y[i];
    den += w[i];
  }
  return num / den;
}

// Extreme of sum(w~ y)/sum(w~) over all 2^n box-vertex assignments
// w~_i in {w_i/lambda, w_i*lambda}. Exponential; keep n <= 20.
struct VertexExtremes {
  double min_value;
  double max_value;
};
inline VertexExtremes vertex_enumeration(const std::vector<double>& y,
                                         const std::vector<double>& w,
                                         double lambda) {
  const std::size_t n = y.size();
  VertexExtremes e{1e300, -1e300};
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double wi = (mask >> i) & 1 ? w[i] * lambda : w[i] / lambda;
      num += wi * y[i];
      den += wi;
    }
    double v = num / den;
    e.min_value = std::min(e.min_value, v);
    e.max_value = std::max(e.max_value, v);
  }
  return e;
}

// Solves max over t>0 of the 1-covariate entropy-balancing stationarity
// condition sum z exp(theta z) / sum exp(theta z) = target by bisection.
inline double entropy_dual_bisection(const std::vector<double>& z, double target,
                                     double lo = -50.0, double hi = 50.0) {
  auto balance = [&](double theta) {
    double num = 0.0, den = 0.0;
    for (double zi : z) {
      double e = std::exp(theta * zi);
      num += zi * e;
      den += e;
    }
    return num / den - target;
  };
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (balance(mid) > 0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline double sort_percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  double h = static_cast<double>(v.size() - 1) * p;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------------------
// Small synthetic clustered datasets

// Clusters of the given sizes and arms; outcomes and covariates from `rng`.
inline cosens::CosDataset make_dataset(const std::vector<int>& arms,
                                       const std::vector<int>& sizes,
                                       cosens::RngStream& rng, int d_x = 1,
                                       int d_k = 1) {
  std::vector<cosens::ClusterRecord> clusters;
  std::vector<cosens::UnitRecord> units;
  for (std::size_t c = 0; c < arms.size(); ++c) {
    cosens::ClusterRecord cl;
    cl.cluster_id = "c" + std::to_string(c + 1);
    cl.a = arms[c];
    for (int j = 0; j < d_k; ++j) cl.k.push_back(rng.normal());
    cl.n_units = static_cast<std::size_t>(sizes[c]);
    for (int i = 0; i < sizes[c]; ++i) {
      cosens::UnitRecord u;
      u.unit_id = cl.cluster_id + "u" + std::to_string(i + 1);
      u.cluster_id = cl.cluster_id;
      for (int j = 0; j < d_x; ++j) u.x.push_back(rng.normal());
      u.y = rng.normal();
      units.push_back(std::move(u));
    }
    clusters.push_back(std::move(cl));
  }
  std::vector<std::string> x_names, k_names;
  for (int j = 0; j < d_x; ++j) x_names.push_back("x" + std::to_string(j + 1));
  for (int j = 0; j < d_k; ++j) k_names.push_back("k" + std::to_string(j + 1));
  return cosens::CosDataset(std::move(units), std::move(clusters),
                            std::move(x_names), std::move(k_names));
}

// Positive weights with mean 1 over the units of the requested arm and
// weight 1 elsewhere (the ATT shape when arm == 0).
inline cosens::WeightSet random_weights(const cosens::CosDataset& ds,
                                        cosens::Estimand estimand,
                                        cosens::RngStream& rng) {
  cosens::WeightSet w;
  w.estimand = estimand;
  w.values.resize(ds.n(), 1.0);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    bool weighted = estimand == cosens::Estimand::att ? ds.arm(i) == 0 : true;
    if (weighted) w.values[i] = 0.2 + rng.uniform01() * 2.0;
  }
  // Hajek-normalize per weighted group.
  for (int arm : {0, 1}) {
    if (estimand == cosens::Estimand::att && arm == 1) continue;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (ds.arm(i) == arm) {
        sum += w.values[i];
        ++n;
      }
    }
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (ds.arm(i) == arm) w.values[i] *= static_cast<double>(n) / sum;
    }
  }
  w.normalized = true;
  return w;
}

// ---------------------------------------------------------------------------
// Nested weight triples with the projection structure
//
// The bias-decomposition identity is algebraically exact when each increment
// is (empirically) mean-zero and uncorrelated with the coarser weights within
// the relevant arm, which is the in-sample counterpart of nested fits
// satisfying E[w_fine | coarser info] = w_coarse. The builder imposes that
// structure by projecting noise onto the orthogonal complement of {1, w}.

// Residual of `noise` on {1, anchor} within the index set, scaled to
// `magnitude` * sd(anchor).
inline std::vector<double> orthogonal_increment(const std::vector<double>& anchor,
                                                const std::vector<std::size_t>& idx,
                                                cosens::RngStream& rng,
                                                double magnitude) {
  std::vector<double> eps(anchor.size(), 0.0);
  std::vector<double> a_sub, n_sub;
  for (std::size_t i : idx) a_sub.push_back(anchor[i]);
  for (std::size_t k = 0; k < idx.size(); ++k) n_sub.push_back(rng.normal());

  double am = mean(a_sub), nm = mean(n_sub);
  double av = variance(a_sub);
  double cov = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    cov += (a_sub[k] - am) * (n_sub[k] - nm);
  }
  cov /= static_cast<double>(idx.size());
  double slope = av > 0 ? cov / av : 0.0;
  std::vector<double> resid(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    resid[k] = (n_sub[k] - nm) - slope * (a_sub[k] - am);
  }
  double rv = std::sqrt(variance(resid));
  double target = magnitude * std::sqrt(std::max(av, 1e-12));
  double s = rv > 0 ? target / rv : 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) eps[idx[k]] = resid[k] * s;
  return eps;
}

struct Triple {
  std::vector<double> reduced, mid, full;
};

// Caps the increment so the decremented weights stay strictly positive;
// rescaling preserves the mean-zero and orthogonality structure.
inline void cap_increment(std::vector<double>& eps, const std::vector<double>& anchor,
                          const std::vector<std::size_t>& idx) {
  double min_w = 1e300, max_e = 0.0;
  for (std::size_t i : idx) {
    min_w = std::min(min_w, anchor[i]);
    max_e = std::max(max_e, std::abs(eps[i]));
  }
  double allowed = 0.45 * min_w;
  if (max_e > allowed && max_e > 0) {
    double s = allowed / max_e;
    for (std::size_t i : idx) eps[i] *= s;
  }
}

// Nested triple over the given arms (controls only for ATT; both for ATO).
// Magnitudes are kept small so all weights stay positive.
inline Triple make_projected_triple(const cosens::CosDataset& ds,
                                    const std::vector<double>& reduced,
                                    const std::vector<int>& arms_used,
                                    cosens::RngStream& rng,
                                    double mag_v = 0.15, double mag_u = 0.1) {
  Triple t;
  t.reduced = reduced;
  t.mid = reduced;
  for (int arm : arms_used) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (ds.arm(i) == arm) idx.push_back(i);
    }
    std::vector<double> eps_v = orthogonal_increment(t.reduced, idx, rng, mag_v);
    cap_increment(eps_v, t.reduced, idx);
    for (std::size_t i : idx) t.mid[i] = t.reduced[i] - eps_v[i];
  }
  t.full = t.mid;
  for (int arm : arms_used) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (ds.arm(i) == arm) idx.push_back(i);
    }
    std::vector<double> eps_u = orthogonal_increment(t.mid, idx, rng, mag_u);
    cap_increment(eps_u, t.mid, idx);
    for (std::size_t i : idx) t.full[i] = t.mid[i] - eps_u[i];
  }
  return t;
}

}  // namespace oracle
