#include "cosens/estimate.hpp"

#include <algorithm>
#include <cmath>

namespace cosens {

namespace {

ArmMoments arm_moments(const CosDataset& ds, const WeightSet& w, int arm) {
  ArmMoments m;
  double sy = 0.0, sw = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.arm(i) != arm) continue;
    sy += ds.units()[i].y;
    sw += w.values[i];
    ++m.n;
  }
  if (m.n < 2) {
    throw_numeric("insufficient data: arm " + std::to_string(arm) +
                  " has fewer than 2 units");
  }
  const double n = static_cast<double>(m.n);
  m.mean_y = sy / n;
  const double mean_w = sw / n;
  double vy = 0.0, vw = 0.0, cwy = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.arm(i) != arm) continue;
    double dy = ds.units()[i].y - m.mean_y;
    double dw = w.values[i] - mean_w;
    vy += dy * dy;
    vw += dw * dw;
    cwy += dw * dy;
  }
  m.var_y = vy / n;
  m.var_w = vw / n;
  if (m.var_y > 0.0 && m.var_w > 0.0) {
    m.cor_wy = (cwy / n) / std::sqrt(m.var_y * m.var_w);
    m.cor_wy = std::clamp(m.cor_wy, -1.0, 1.0);
  } else {
    m.cor_defined = false;
    m.cor_wy = 0.0;
  }
  return m;
}

}  // namespace

GroupMoments group_moments(const CosDataset& ds, const WeightSet& w) {
  if (w.values.size() != ds.n()) throw_contract("weight vector does not match dataset");
  GroupMoments g;
  g.arm[0] = arm_moments(ds, w, 0);
  g.arm[1] = arm_moments(ds, w, 1);
  return g;
}

EffectEstimate point_estimate(const CosDataset& ds, const WeightSet& w) {
  if (w.values.size() != ds.n()) throw_contract("weight vector does not match dataset");
  if (!w.normalized) {
    throw_contract("point_estimate requires Hajek-normalized weights");
  }
  double t1 = 0.0, t0 = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    double y = ds.units()[i].y;
    if (ds.arm(i) == 1) {
      t1 += (w.estimand == Estimand::att ? y : w.values[i] * y);
    } else {
      t0 += w.values[i] * y;
    }
  }
  EffectEstimate est;
  est.estimand = w.estimand;
  est.tau_hat = t1 / static_cast<double>(ds.n1()) - t0 / static_cast<double>(ds.n0());
  est.moments = group_moments(ds, w);
  est.weight_source = w.source;
  est.conditioning = w.conditioning;
  est.clip_warning = w.clip_warning;
  return est;
}

}  // namespace cosens
