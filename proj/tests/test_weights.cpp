#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "cosens/weights.hpp"
#include "oracles.hpp"

using namespace cosens;

namespace {

// One-unit-per-cluster dataset with a single covariate and treatment drawn
// from a logistic model with the given coefficients.
CosDataset logistic_sim(std::size_t n, double b0, double b1, RngStream& rng) {
  std::vector<UnitRecord> units;
  std::vector<ClusterRecord> clusters;
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.normal();
    double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * x)));
    int a = rng.uniform01() < p ? 1 : 0;
    ClusterRecord c;
    c.cluster_id = "c" + std::to_string(i);
    c.a = a;
    c.k = {x};
    c.n_units = 1;
    clusters.push_back(c);
    UnitRecord u;
    u.unit_id = "u" + std::to_string(i);
    u.cluster_id = c.cluster_id;
    u.y = rng.normal();
    units.push_back(u);
  }
  return CosDataset(std::move(units), std::move(clusters), {}, {"x"});
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("null model: slope -> 0, intercept -> logit of treated share",
          "[weights][irls]") {
  RngStream rng(1001);
  CosDataset ds = logistic_sim(5000, 0.4, 0.0, rng);
  PropensityFit fit = fit_propensity(ds, Conditioning::cod);
  REQUIRE(fit.converged);
  double share = static_cast<double>(ds.n1()) / static_cast<double>(ds.n());
  REQUIRE(fit.coefficients[0] == Catch::Approx(std::log(share / (1 - share))).margin(0.05));
  REQUIRE(std::abs(fit.coefficients[1]) < 0.1);
}

TEST_CASE("logistic fit recovers generating coefficients", "[weights][irls]") {
  RngStream rng(1002);
  CosDataset ds = logistic_sim(5000, 0.5, 1.0, rng);
  PropensityFit fit = fit_propensity(ds, Conditioning::cod);
  REQUIRE(fit.converged);
  REQUIRE(fit.coefficients[0] == Catch::Approx(0.5).margin(0.1));
  REQUIRE(fit.coefficients[1] == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("coefficient error shrinks with sample size", "[weights][irls]") {
  auto fit_error = [](std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    CosDataset ds = logistic_sim(n, 0.5, 1.0, rng);
    PropensityFit fit = fit_propensity(ds, Conditioning::cod);
    return std::abs(fit.coefficients[1] - 1.0) + std::abs(fit.coefficients[0] - 0.5);
  };
  // Averaged over a few seeds to keep the comparison stable.
  double small = 0.0, large = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    small += fit_error(400, 2000 + s);
    large += fit_error(20000, 3000 + s);
  }
  REQUIRE(large < small);
}

TEST_CASE("perfect separation raises an error advising ridge", "[weights][irls]") {
  std::vector<UnitRecord> units;
  std::vector<ClusterRecord> clusters;
  for (int i = 0; i < 20; ++i) {
    ClusterRecord c;
    c.cluster_id = "c" + std::to_string(i);
    c.a = i < 10 ? 1 : 0;
    // Small covariate scale: saturation needs a coefficient far beyond the
    // separation bound, so detection trips quickly.
    c.k = {i < 10 ? 0.1 + 0.01 * i : -0.1 - 0.01 * i};
    c.n_units = 1;
    clusters.push_back(c);
    UnitRecord u;
    u.unit_id = "u" + std::to_string(i);
    u.cluster_id = c.cluster_id;
    u.y = 0.0;
    units.push_back(u);
  }
  CosDataset ds(units, clusters, {}, {"x"});
  try {
    fit_propensity(ds, Conditioning::cod);
    FAIL("expected separation error");
  } catch (const Error& e) {
    REQUIRE(std::string(e.what()).find("ridge") != std::string::npos);
  }
  // The same data fits under ridge.
  PropensityOptions opts;
  opts.ridge = 1.0;
  REQUIRE_NOTHROW(fit_propensity(ds, Conditioning::cod, opts));
}

TEST_CASE("rank-deficient design names the collinear column", "[weights][irls]") {
  RngStream rng(1003);
  CosDataset ds = oracle::make_dataset({1, 0, 1, 0}, {5, 5, 5, 5}, rng, 1, 2);
  // k2 duplicates k1 exactly.
  std::vector<ClusterRecord> clusters = ds.clusters();
  for (auto& c : clusters) c.k[1] = c.k[0];
  CosDataset dup(ds.units(), clusters, ds.x_names(), ds.k_names());
  try {
    fit_propensity(dup, Conditioning::cod);
    FAIL("expected singular-design error");
  } catch (const Error& e) {
    REQUIRE(std::string(e.what()).find("collinear") != std::string::npos);
  }
}

TEST_CASE("propensity weight transforms (raw values)", "[weights]") {
  PropensityFit fit;
  fit.scores = {0.5, 0.8, 0.8};
  fit.arms = {1, 0, 1};
  fit.conditioning = Conditioning::cud;

  WeightSet att = weights_from_propensity(fit, Estimand::att, false);
  REQUIRE(att.values[0] == 1.0);                       // treated stays 1
  REQUIRE(att.values[1] == Catch::Approx(4.0));        // 0.8/0.2
  WeightSet ato = weights_from_propensity(fit, Estimand::ato, false);
  REQUIRE(ato.values[1] == Catch::Approx(0.8));        // control: pi
  REQUIRE(ato.values[2] == Catch::Approx(0.2));        // treated: 1-pi
  WeightSet ate = weights_from_propensity(fit, Estimand::ate, false);
  REQUIRE(ate.values[2] == Catch::Approx(1.25));       // treated: 1/pi
  REQUIRE(ate.values[1] == Catch::Approx(5.0));        // control: 1/(1-pi)

  // pi = 0.5 everywhere, ATT -> all control weights 1.
  PropensityFit half;
  half.scores = {0.5, 0.5, 0.5, 0.5};
  half.arms = {1, 0, 0, 1};
  WeightSet att_half = weights_from_propensity(half, Estimand::att);
  REQUIRE(att_half.normalized);
  for (double v : att_half.values) REQUIRE(v == Catch::Approx(1.0));
}

TEST_CASE("ATT and ATO control weights are linked by 1/(1-pi)", "[weights]") {
  RngStream rng(1004);
  PropensityFit fit;
  for (int i = 0; i < 50; ++i) {
    fit.scores.push_back(0.1 + 0.8 * rng.uniform01());
    fit.arms.push_back(i % 3 == 0 ? 1 : 0);
  }
  WeightSet att = weights_from_propensity(fit, Estimand::att, false);
  WeightSet ato = weights_from_propensity(fit, Estimand::ato, false);
  for (std::size_t i = 0; i < fit.scores.size(); ++i) {
    if (fit.arms[i] == 1) continue;
    REQUIRE(att.values[i] ==
            Catch::Approx(ato.values[i] / (1.0 - fit.scores[i])).epsilon(1e-12));
  }
}

TEST_CASE("normalize: rescale, degenerate input, group means", "[weights]") {
  RngStream rng(1005);
  CosDataset ds = oracle::make_dataset({1, 0}, {2, 3}, rng);

  WeightSet w;
  w.estimand = Estimand::att;
  w.values = {1.0, 1.0, 2.0, 2.0, 2.0};  // controls all 2
  WeightSet n = normalize(w, ds);
  REQUIRE(n.values[2] == 1.0);
  REQUIRE(n.values[3] == 1.0);
  REQUIRE(n.values[4] == 1.0);
  REQUIRE(n.normalized);

  WeightSet w13;
  w13.estimand = Estimand::att;
  w13.values = {1.0, 1.0, 1.0, 3.0, 2.0};
  WeightSet n13 = normalize(w13, ds);
  REQUIRE(n13.values[2] == Catch::Approx(0.5));
  REQUIRE(n13.values[3] == Catch::Approx(1.5));

  WeightSet zero;
  zero.estimand = Estimand::att;
  zero.values = {1.0, 1.0, 0.0, 0.0, 0.0};
  REQUIRE_THROWS_AS(normalize(zero, ds), Error);
}

TEST_CASE("normalized weights average one per weighted group", "[weights][property]") {
  RngStream rng(1006);
  for (int rep = 0; rep < 20; ++rep) {
    CosDataset ds = oracle::make_dataset({1, 0, 1, 0, 0}, {4, 5, 3, 6, 2}, rng);
    WeightSet w;
    w.estimand = rep % 2 ? Estimand::ato : Estimand::ate;
    for (std::size_t i = 0; i < ds.n(); ++i) w.values.push_back(rng.uniform01() + 0.1);
    WeightSet n = normalize(w, ds);
    for (int arm : {0, 1}) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < ds.n(); ++i) {
        if (ds.arm(i) == arm) {
          REQUIRE(n.values[i] >= 0.0);
          sum += n.values[i];
          ++count;
        }
      }
      REQUIRE(sum / static_cast<double>(count) == Catch::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("entropy balancing: zero imbalance gives uniform weights", "[weights][balance]") {
  // Treated and control means already equal.
  std::vector<UnitRecord> units;
  std::vector<ClusterRecord> clusters;
  auto add = [&](const std::string& cid, int a, std::vector<double> xs) {
    ClusterRecord c;
    c.cluster_id = cid;
    c.a = a;
    c.k = {0.0};
    c.n_units = xs.size();
    clusters.push_back(c);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      UnitRecord u;
      u.unit_id = cid + "u" + std::to_string(i);
      u.cluster_id = cid;
      u.x = {xs[i]};
      u.y = 0.0;
      units.push_back(u);
    }
  };
  add("t", 1, {0.0, 2.0});
  add("c", 0, {1.0, 0.0, 2.0});
  CosDataset ds(units, clusters, {"z"}, {"k"});
  WeightSet w = balancing_weights(ds, Estimand::att);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.arm(i) == 0) REQUIRE(w.values[i] == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("entropy balancing matches the 1-d dual bisection oracle",
          "[weights][balance]") {
  // Controls z in {0,1,2}, treated mean 1.5.
  std::vector<UnitRecord> units;
  std::vector<ClusterRecord> clusters;
  auto add = [&](const std::string& cid, int a, std::vector<double> xs) {
    ClusterRecord c;
    c.cluster_id = cid;
    c.a = a;
    c.k = {0.0};
    c.n_units = xs.size();
    clusters.push_back(c);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      UnitRecord u;
      u.unit_id = cid + "u" + std::to_string(i);
      u.cluster_id = cid;
      u.x = {xs[i]};
      u.y = 0.0;
      units.push_back(u);
    }
  };
  add("t", 1, {1.0, 2.0});  // mean 1.5
  add("c", 0, {0.0, 1.0, 2.0});
  CosDataset ds(units, clusters, {"z"}, {"k"});
  WeightSet w = balancing_weights(ds, Estimand::att);

  std::vector<double> cz = {0.0, 1.0, 2.0}, cw;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.arm(i) == 0) cw.push_back(w.values[i]);
  }
  REQUIRE(oracle::weighted_mean(cz, cw) == Catch::Approx(1.5).margin(1e-6));

  // The dual solution from the oracle reproduces the same weights.
  double theta = oracle::entropy_dual_bisection(cz, 1.5);
  std::vector<double> ow = {std::exp(theta * 0.0), std::exp(theta * 1.0),
                            std::exp(theta * 2.0)};
  double om = (ow[0] + ow[1] + ow[2]) / 3.0;
  for (auto& v : ow) v /= om;
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(cw[i] == Catch::Approx(ow[i]).margin(1e-6));
  }
}

TEST_CASE("entropy balancing balances every covariate on fitted data",
          "[weights][balance][property]") {
  RngStream rng(1007);
  // Enough control clusters that the treated cluster-covariate means sit
  // inside the convex hull of the control support.
  CosDataset ds = oracle::make_dataset(
      {1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0},
      {9, 8, 10, 7, 9, 6, 11, 8, 10, 9, 7, 12, 8, 9}, rng, 2, 2);
  WeightSet w = balancing_weights(ds, Estimand::att);
  for (const auto& name : {"x1", "x2", "k1", "k2"}) {
    std::vector<double> col = ds.covariate_column(name);
    double tmean = 0.0, wmean = 0.0, wsum = 0.0;
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (ds.arm(i) == 1) {
        tmean += col[i];
        ++n1;
      } else {
        wmean += w.values[i] * col[i];
        wsum += w.values[i];
      }
    }
    REQUIRE(wmean / wsum == Catch::Approx(tmean / static_cast<double>(n1)).margin(1e-6));
  }
}

TEST_CASE("balancing rejects ATO and collinear designs", "[weights][balance]") {
  RngStream rng(1008);
  CosDataset ds = oracle::make_dataset({1, 0, 0}, {4, 5, 5}, rng, 1, 1);
  REQUIRE_THROWS_AS(balancing_weights(ds, Estimand::ato), Error);
  try {
    balancing_weights(ds, Estimand::ato);
  } catch (const Error& e) {
    REQUIRE(e.kind() == Error::Kind::config);
  }

  // Duplicate covariate columns.
  std::vector<UnitRecord> units = ds.units();
  std::vector<std::string> x_names = {"x1", "x1dup"};
  for (auto& u : units) u.x = {u.x[0], u.x[0]};
  CosDataset dup(units, ds.clusters(), x_names, ds.k_names());
  REQUIRE_THROWS_AS(balancing_weights(dup, Estimand::att), Error);
}

TEST_CASE("external weights load, validate and normalize", "[weights][external]") {
  RngStream rng(1009);
  CosDataset ds = oracle::make_dataset({1, 0}, {2, 2}, rng);
  auto path = (std::filesystem::temp_directory_path() / "cosens_w.csv").string();
  {
    std::ofstream out(path);
    out << "unit_id,weight\n";
    for (std::size_t i = 0; i < ds.n(); ++i) {
      out << ds.units()[i].unit_id << "," << (i + 1) << "\n";
    }
  }
  WeightSet w = load_external_weights(path, ds, Estimand::ato);
  REQUIRE(w.source == WeightSource::external);
  REQUIRE(w.normalized);
  std::filesystem::remove(path);

  {
    std::ofstream out(path);
    out << "unit_id,weight\nc1u1,1\n";  // missing units
  }
  REQUIRE_THROWS_AS(load_external_weights(path, ds, Estimand::ato), Error);
  std::filesystem::remove(path);
}
