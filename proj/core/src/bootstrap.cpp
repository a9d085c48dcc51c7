#include "cosens/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "cosens/estimate.hpp"
#include "cosens/sensitivity.hpp"

namespace cosens {

Statistic Statistic::from_string(const std::string& name, double param) {
  Statistic s;
  s.param = param;
  if (name == "estimate") s.kind = Kind::estimate;
  else if (name == "msm_lower") s.kind = Kind::msm_lower;
  else if (name == "msm_upper") s.kind = Kind::msm_upper;
  else if (name == "vbm_lower") s.kind = Kind::vbm_lower;
  else if (name == "vbm_upper") s.kind = Kind::vbm_upper;
  else throw_config("unknown statistic '" + name + "'");
  return s;
}

const char* Statistic::name() const {
  switch (kind) {
    case Kind::estimate: return "estimate";
    case Kind::msm_lower: return "msm_lower";
    case Kind::msm_upper: return "msm_upper";
    case Kind::vbm_lower: return "vbm_lower";
    case Kind::vbm_upper: return "vbm_upper";
  }
  return "?";
}

CosDataset resample_clusters(const CosDataset& ds, RngStream& rng) {
  const std::size_t m = ds.m();
  std::vector<ClusterRecord> clusters;
  std::vector<UnitRecord> units;
  clusters.reserve(m);

  // Unit indices grouped by cluster, in dataset order.
  std::vector<std::vector<std::size_t>> members(m);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    members[ds.cluster_index(i)].push_back(i);
  }

  for (std::size_t draw = 0; draw < m; ++draw) {
    std::size_t c = static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(m)));
    ClusterRecord cl = ds.clusters()[c];
    const std::string tag = "b" + std::to_string(draw) + ".";
    cl.cluster_id = tag + cl.cluster_id;
    clusters.push_back(std::move(cl));
    for (std::size_t i : members[c]) {
      UnitRecord u = ds.units()[i];
      u.unit_id = tag + u.unit_id;
      u.cluster_id = clusters.back().cluster_id;
      units.push_back(std::move(u));
    }
  }
  return CosDataset(std::move(units), std::move(clusters), ds.x_names(), ds.k_names());
}

namespace {

double evaluate_statistic(const CosDataset& ds, const WeightSet& w,
                          const Statistic& stat) {
  switch (stat.kind) {
    case Statistic::Kind::estimate:
      return point_estimate(ds, w).tau_hat;
    case Statistic::Kind::msm_lower:
      return msm_bounds(ds, w, stat.param).lower;
    case Statistic::Kind::msm_upper:
      return msm_bounds(ds, w, stat.param).upper;
    case Statistic::Kind::vbm_lower:
      return vbm_bound(point_estimate(ds, w), stat.param).lower;
    case Statistic::Kind::vbm_upper:
      return vbm_bound(point_estimate(ds, w), stat.param).upper;
  }
  throw_contract("unreachable statistic kind");
}

}  // namespace

std::vector<BootstrapCI> block_bootstrap_multi(const CosDataset& ds, int B,
                                               double level, std::uint64_t seed,
                                               const WeightConfig& pipeline,
                                               const std::vector<Statistic>& stats) {
  if (B < 1) throw_config("bootstrap replicate count must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw_config("bootstrap level must lie in (0, 1)");
  if (stats.empty()) throw_contract("no statistics requested");

  std::vector<std::vector<double>> draws(stats.size());
  int failures = 0;
  for (int b = 0; b < B; ++b) {
    RngStream rng = RngStream::derive(seed, {0x626f6f74ull, static_cast<std::uint64_t>(b)});
    try {
      CosDataset rds = resample_clusters(ds, rng);
      WeightSet w = fit_weights(rds, pipeline);
      for (std::size_t s = 0; s < stats.size(); ++s) {
        draws[s].push_back(evaluate_statistic(rds, w, stats[s]));
      }
    } catch (const Error&) {
      ++failures;  // single-arm resample or refit failure
    }
  }
  if (failures > B / 2) {
    throw_numeric("bootstrap inference failed: " + std::to_string(failures) +
                  " of " + std::to_string(B) + " replicates degenerate");
  }

  const double alpha = 1.0 - level;
  std::vector<BootstrapCI> out(stats.size());
  for (std::size_t s = 0; s < stats.size(); ++s) {
    BootstrapCI ci;
    ci.lower = percentile(draws[s], alpha / 2.0);
    ci.upper = percentile(draws[s], 1.0 - alpha / 2.0);
    ci.replicates_used = static_cast<int>(draws[s].size());
    ci.failures = failures;
    ci.seed = seed;
    out[s] = ci;
  }
  return out;
}

BootstrapCI block_bootstrap(const CosDataset& ds, const BootstrapSpec& spec,
                            const WeightConfig& pipeline) {
  return block_bootstrap_multi(ds, spec.B, spec.level, spec.seed, pipeline,
                               {spec.statistic})[0];
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw_contract("percentile of an empty sample");
  if (p < 0.0 || p > 1.0) throw_contract("percentile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  double h = static_cast<double>(n - 1) * p;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, n - 1);
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace cosens
