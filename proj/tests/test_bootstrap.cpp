#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "cosens/bootstrap.hpp"
#include "cosens/estimate.hpp"
#include "oracles.hpp"

using namespace cosens;

TEST_CASE("percentile: examples and sort oracle", "[bootstrap][percentile]") {
  REQUIRE(percentile({1, 2, 3}, 0.5) == 2.0);
  REQUIRE(percentile({1, 2, 3, 4}, 0.5) == 2.5);
  REQUIRE(percentile({5}, 0.9) == 5.0);
  REQUIRE_THROWS_AS(percentile({}, 0.5), Error);

  RngStream rng(6001);
  std::vector<double> v(37);
  for (auto& x : v) x = rng.uniform(-5, 5);
  for (double p : {0.0, 0.025, 0.31, 0.5, 0.975, 1.0}) {
    REQUIRE(percentile(v, p) == Catch::Approx(oracle::sort_percentile(v, p)).epsilon(1e-14));
  }
}

TEST_CASE("resampling keeps cluster unit multisets intact", "[bootstrap]") {
  RngStream data_rng(6002);
  CosDataset ds = oracle::make_dataset({1, 0, 1, 0}, {3, 5, 4, 6}, data_rng);

  // Outcome multiset per original cluster, keyed by the cluster covariate
  // (unique continuous draws identify the source cluster).
  std::map<double, std::multiset<double>> source;
  for (std::size_t c = 0; c < ds.m(); ++c) {
    std::multiset<double> ys;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (ds.cluster_index(i) == c) ys.insert(ds.units()[i].y);
    }
    source[ds.clusters()[c].k[0]] = std::move(ys);
  }

  RngStream rng(6003);
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    CosDataset rds = [&]() -> CosDataset {
      try {
        return resample_clusters(ds, rng);
      } catch (const Error&) {
        return ds;  // single-arm draw; the library counts these as failures
      }
    }();
    REQUIRE(rds.m() == ds.m());
    for (std::size_t c = 0; c < rds.m(); ++c) {
      std::multiset<double> ys;
      for (std::size_t i = 0; i < rds.n(); ++i) {
        if (rds.cluster_index(i) == c) ys.insert(rds.units()[i].y);
      }
      REQUIRE(source.at(rds.clusters()[c].k[0]) == ys);
    }
    ++checked;
  }
  REQUIRE(checked == 20);
}

namespace {

WeightConfig simple_pipeline() {
  WeightConfig cfg;
  cfg.source = WeightSource::propensity;
  cfg.conditioning = Conditioning::cod;
  cfg.estimand = Estimand::att;
  cfg.propensity.ridge = 1e-4;
  return cfg;
}

}  // namespace

TEST_CASE("bootstrap: determinism and degenerate cases", "[bootstrap]") {
  RngStream data_rng(6004);
  CosDataset ds = oracle::make_dataset({1, 0, 1, 0, 1, 0, 1, 0},
                                       {4, 6, 5, 7, 3, 6, 4, 5}, data_rng);

  BootstrapSpec spec;
  spec.B = 40;
  spec.level = 0.9;
  spec.seed = 77;
  spec.statistic = {Statistic::Kind::estimate, 0.0};
  WeightConfig cfg = simple_pipeline();

  BootstrapCI a = block_bootstrap(ds, spec, cfg);
  BootstrapCI b = block_bootstrap(ds, spec, cfg);
  REQUIRE(a.lower == b.lower);  // bit-exact replay
  REQUIRE(a.upper == b.upper);
  REQUIRE(a.replicates_used + a.failures == spec.B);
  REQUIRE(a.lower <= a.upper);

  spec.seed = 78;
  BootstrapCI c = block_bootstrap(ds, spec, cfg);
  REQUIRE((c.lower != a.lower || c.upper != a.upper));

  // B = 1: interval collapses to the single replicate value.
  spec.B = 1;
  BootstrapCI one = block_bootstrap(ds, spec, cfg);
  REQUIRE(one.lower == one.upper);
}

TEST_CASE("bootstrap: constant statistic collapses to a point", "[bootstrap]") {
  RngStream data_rng(6005);
  // Constant outcome everywhere: tau is 0 under every resample.
  std::vector<UnitRecord> units;
  std::vector<ClusterRecord> clusters;
  for (int c = 0; c < 6; ++c) {
    ClusterRecord cl{"c" + std::to_string(c), c % 2, {data_rng.normal()}, 3};
    clusters.push_back(cl);
    for (int i = 0; i < 3; ++i) {
      units.push_back({"c" + std::to_string(c) + "u" + std::to_string(i),
                       cl.cluster_id, {}, 4.25});
    }
  }
  CosDataset ds(units, clusters, {}, {"k"});
  BootstrapSpec spec;
  spec.B = 25;
  spec.seed = 5;
  spec.statistic = {Statistic::Kind::estimate, 0.0};
  BootstrapCI ci = block_bootstrap(ds, spec, simple_pipeline());
  REQUIRE(ci.lower == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(ci.upper == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("bootstrap: bound statistics run and nest sanely", "[bootstrap]") {
  RngStream data_rng(6006);
  CosDataset ds = oracle::make_dataset({1, 0, 1, 0, 0}, {5, 6, 4, 7, 5}, data_rng);
  WeightConfig cfg = simple_pipeline();

  std::vector<Statistic> stats = {{Statistic::Kind::msm_lower, 1.5},
                                  {Statistic::Kind::msm_upper, 1.5},
                                  {Statistic::Kind::vbm_lower, 0.2},
                                  {Statistic::Kind::vbm_upper, 0.2}};
  auto cis = block_bootstrap_multi(ds, 30, 0.95, 99, cfg, stats);
  REQUIRE(cis.size() == 4);
  REQUIRE(cis[0].lower <= cis[1].upper);
  REQUIRE(cis[2].lower <= cis[3].upper);
  for (const auto& ci : cis) REQUIRE(ci.failures == cis[0].failures);
}

TEST_CASE("bootstrap failure accounting", "[bootstrap]") {
  // Refit fails on every replicate (external weights keyed to the original
  // unit ids cannot cover resampled units), so the failure cap trips.
  RngStream data_rng(6007);
  CosDataset ds = oracle::make_dataset({1, 0, 1, 0}, {4, 4, 3, 5}, data_rng);
  auto path = (std::filesystem::temp_directory_path() / "cosens_extw.csv").string();
  {
    std::ofstream out(path);
    out << "unit_id,weight\n";
    for (const auto& u : ds.units()) out << u.unit_id << ",1\n";
  }
  WeightConfig cfg;
  cfg.source = WeightSource::external;
  cfg.estimand = Estimand::att;
  cfg.external_path = path;

  BootstrapSpec spec;
  spec.B = 20;
  spec.seed = 3;
  spec.statistic = {Statistic::Kind::estimate, 0.0};
  REQUIRE_THROWS_AS(block_bootstrap(ds, spec, cfg), Error);
  std::filesystem::remove(path);
}

TEST_CASE("statistic parsing", "[bootstrap]") {
  REQUIRE(Statistic::from_string("estimate", 0).kind == Statistic::Kind::estimate);
  REQUIRE(Statistic::from_string("msm_lower", 2).kind == Statistic::Kind::msm_lower);
  REQUIRE(Statistic::from_string("vbm_upper", 0.1).kind == Statistic::Kind::vbm_upper);
  REQUIRE_THROWS_AS(Statistic::from_string("median", 0), Error);
}
