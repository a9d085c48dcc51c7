#pragma once

#include <cstdint>

#include "cosens/dataset.hpp"
#include "cosens/rng.hpp"
#include "cosens/types.hpp"
#include "cosens/weights.hpp"

namespace cosens {

// Statistic recomputed on each bootstrap replicate; `param` is the fixed
// sensitivity parameter for bound endpoints.
struct Statistic {
  enum class Kind { estimate, msm_lower, msm_upper, vbm_lower, vbm_upper };
  Kind kind = Kind::estimate;
  double param = 0.0;

  static Statistic from_string(const std::string& name, double param);
  const char* name() const;
};

struct BootstrapSpec {
  int B = 200;
  double level = 0.95;
  std::uint64_t seed = 0;
  Statistic statistic;
};

struct BootstrapCI {
  double lower = 0.0;
  double upper = 0.0;
  int replicates_used = 0;
  int failures = 0;
  std::uint64_t seed = 0;
};

// Draws m clusters with replacement (fresh identifiers for duplicates) and
// keeps every unit of each drawn cluster; no unit-level resampling.
CosDataset resample_clusters(const CosDataset& ds, RngStream& rng);

// Cluster (block) bootstrap percentile interval for one statistic: each
// replicate resamples clusters, refits the weights per `pipeline`, and
// recomputes the statistic. Replicates with a single arm or a failed refit
// are skipped and counted; more than B/2 failures is an inference error.
// Per-replicate RNG streams derive from (seed, replicate index), so results
// do not depend on evaluation order.
BootstrapCI block_bootstrap(const CosDataset& ds, const BootstrapSpec& spec,
                            const WeightConfig& pipeline);

// Same resampling pass evaluated for several statistics at once.
std::vector<BootstrapCI> block_bootstrap_multi(const CosDataset& ds, int B,
                                               double level, std::uint64_t seed,
                                               const WeightConfig& pipeline,
                                               const std::vector<Statistic>& stats);

// Type-7 linear-interpolation quantile of an unsorted sample; p in [0, 1].
double percentile(std::vector<double> values, double p);

}  // namespace cosens
