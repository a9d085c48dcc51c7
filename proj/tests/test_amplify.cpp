#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cosens/amplify.hpp"
#include "cosens/simulate.hpp"
#include "oracles.hpp"

using namespace cosens;

TEST_CASE("amplify lambda: endpoints, symmetric split, identity", "[amplify]") {
  AmplificationCurve one = amplify_lambda(1.0);
  REQUIRE(one.points.size() == 1);
  REQUIRE(one.points[0].component_v == 1.0);
  REQUIRE(one.points[0].component_u == 1.0);

  AmplificationCurve four = amplify_lambda(4.0, 21);
  bool has_2_2 = false;
  for (const auto& p : four.points) {
    REQUIRE(p.component_v >= 1.0);
    REQUIRE(p.component_u >= 1.0);
    REQUIRE(p.component_v * p.component_u ==
            Catch::Approx(4.0).epsilon(1e-12));
    if (std::abs(p.component_v - 2.0) < 1e-12 &&
        std::abs(p.component_u - 2.0) < 1e-12) {
      has_2_2 = true;
    }
  }
  REQUIRE(has_2_2);
  REQUIRE(four.points.front().component_v == 1.0);
  REQUIRE(four.points.back().component_v == 4.0);

  REQUIRE_THROWS_AS(amplify_lambda(0.5), Error);
}

TEST_CASE("amplify r2: endpoints, known point, identity", "[amplify]") {
  AmplificationCurve zero = amplify_r2(0.0);
  REQUIRE(zero.points.size() == 1);
  REQUIRE(zero.points[0].component_v == 0.0);
  REQUIRE(zero.points[0].component_u == 0.0);

  // R2_V = R2_U = 0.5 -> total 0.75.
  AmplificationCurve c = amplify_r2(0.75, 7);
  bool has_half = false;
  for (const auto& p : c.points) {
    REQUIRE(p.component_v >= 0.0);
    REQUIRE(p.component_v <= 0.75 + 1e-15);
    REQUIRE(p.component_u >= -1e-15);
    REQUIRE(p.component_u <= 0.75 + 1e-15);
    double total = 1.0 - (1.0 - p.component_v) * (1.0 - p.component_u);
    REQUIRE(total == Catch::Approx(0.75).margin(1e-12));
    if (std::abs(p.component_v - 0.5) < 1e-12 &&
        std::abs(p.component_u - 0.5) < 1e-12) {
      has_half = true;
    }
  }
  // grid of 7 on [0, 0.75] hits 0.5 at index 4
  REQUIRE(has_half);

  REQUIRE_THROWS_AS(amplify_r2(1.0), Error);
  REQUIRE_THROWS_AS(amplify_r2(-0.2), Error);
}

namespace {

WeightConfig att_propensity_config(double ridge = 0.0) {
  WeightConfig cfg;
  cfg.source = WeightSource::propensity;
  cfg.conditioning = Conditioning::cud;
  cfg.estimand = Estimand::att;
  cfg.propensity.ridge = ridge;
  return cfg;
}

}  // namespace

TEST_CASE("benchmark: empty subset gives (0, 1)", "[benchmark]") {
  DgpConfig dgp;
  dgp.seed = 501;
  SimDraw draw = simulate_draw(dgp, dgp.seed);
  WeightConfig cfg = att_propensity_config();
  WeightSet base = fit_weights(draw.ds, cfg);
  auto entries = benchmark(draw.ds, base, {{}}, cfg);
  REQUIRE(entries.size() == 1);
  REQUIRE(entries[0].refit_ok);
  REQUIRE(entries[0].r2_b == 0.0);
  REQUIRE(entries[0].lambda_b == 1.0);
}

TEST_CASE("benchmark: duplicated covariate column is a null benchmark",
          "[benchmark][oracle]") {
  DgpConfig dgp;
  dgp.seed = 502;
  SimDraw draw = simulate_draw(dgp, dgp.seed);

  // Append an exact duplicate of P2 as a new cluster covariate.
  std::vector<ClusterRecord> clusters = draw.ds.clusters();
  for (auto& c : clusters) c.k.push_back(c.k[1]);
  std::vector<std::string> k_names = draw.ds.k_names();
  k_names.push_back("P2dup");
  CosDataset ds(draw.ds.units(), clusters, draw.ds.x_names(), k_names);

  WeightConfig cfg = att_propensity_config(1e-6);  // duplicate needs ridge
  WeightSet base = fit_weights(ds, cfg);
  auto entries = benchmark(ds, base, {{"P2dup"}}, cfg);
  REQUIRE(entries[0].refit_ok);
  REQUIRE(entries[0].r2_b < 0.01);
  REQUIRE(entries[0].lambda_b < 1.05);
}

TEST_CASE("benchmark: strong confounder beats pure noise", "[benchmark][oracle]") {
  // Strong-confounder DGP: P dominates the assignment (poor overlap keeps
  // the covariate signal in the treatment draw), P2 is uncorrelated so it
  // cannot stand in for P, and K4 is weak.
  DgpConfig dgp;
  dgp.seed = 503;
  dgp.m1 = 30;
  dgp.m0 = 40;
  dgp.d_k = 4;
  dgp.overlap_c = 1.0;
  dgp.cor_p_p2 = 0.0;
  dgp.ps_coefficients = {-0.5, 1.0, 0.0, 0.0, 0.15, 0.0, 0.0};
  SimDraw draw = simulate_draw(dgp, dgp.seed);
  WeightConfig cfg = att_propensity_config();
  WeightSet base = fit_weights(draw.ds, cfg);

  auto entries = benchmark(draw.ds, base, {{"P"}, {"K4"}}, cfg);
  REQUIRE(entries[0].refit_ok);
  REQUIRE(entries[1].refit_ok);
  REQUIRE(entries[0].r2_b > entries[1].r2_b);
}

TEST_CASE("benchmark: superset omission does not shrink r2 (fixed seed)",
          "[benchmark][property]") {
  DgpConfig dgp;
  dgp.seed = 504;
  SimDraw draw = simulate_draw(dgp, dgp.seed);
  WeightConfig cfg = att_propensity_config();
  WeightSet base = fit_weights(draw.ds, cfg);
  auto entries = benchmark(draw.ds, base, {{"P"}, {"P", "P2"}}, cfg);
  REQUIRE(entries[1].r2_raw >= entries[0].r2_raw - 1e-9);
  REQUIRE(entries[0].lambda_b >= 1.0);
  REQUIRE(entries[0].r2_b >= 0.0);
}

TEST_CASE("benchmark plot data: frontier identity and axis placement",
          "[benchmark]") {
  std::vector<BenchmarkEntry> entries(2);
  entries[0].omitted = {"vol"};
  entries[0].levels = {CovariateLevel::cluster};
  entries[0].r2_b = 0.12;
  entries[1].omitted = {"age", "vol"};
  entries[1].levels = {CovariateLevel::unit, CovariateLevel::cluster};
  entries[1].r2_b = 0.2;

  CsvTable t = benchmark_plot_data(entries, 0.3, 11);
  std::size_t frontier_rows = 0;
  for (const auto& row : t.rows) {
    if (row[0] == "frontier") {
      ++frontier_rows;
      double v = std::stod(row[2]);
      double u = std::stod(row[3]);
      REQUIRE(1.0 - (1.0 - v) * (1.0 - u) == Catch::Approx(0.3).margin(1e-12));
    } else if (row[1] == "vol") {
      REQUIRE(std::stod(row[2]) == Catch::Approx(0.12));
      REQUIRE(std::stod(row[3]) == 0.0);  // cluster-only: V axis
    } else {
      REQUIRE(std::stod(row[2]) == Catch::Approx(0.2));  // mixed: both axes
      REQUIRE(std::stod(row[3]) == Catch::Approx(0.2));
    }
  }
  REQUIRE(frontier_rows == 11);

  CsvTable empty = benchmark_plot_data({}, 0.3, 5);
  for (const auto& row : empty.rows) REQUIRE(row[0] == "frontier");
}
