#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cosens/amplify.hpp"
#include "cosens/bootstrap.hpp"
#include "cosens/dataset.hpp"
#include "cosens/simulate.hpp"
#include "cosens/types.hpp"
#include "cosens/weights.hpp"

namespace cosens {

struct SensitivityRequest {
  SensModel model = SensModel::msm;
  std::vector<double> params;
  bool threshold = true;
  bool emit_plot = false;
};

struct DecomposeRequest {
  std::vector<std::string> treat_as_v;  // cluster covariates played as V
  std::vector<std::string> treat_as_u;  // unit covariates played as U
};

struct AmplifyRequest {
  SensModel model = SensModel::vbm;
  double total = 0.0;
  int grid_size = 21;
};

struct BenchmarkRequest {
  std::vector<std::vector<std::string>> subsets;
};

struct BootstrapRequest {
  int B = 200;
  double level = 0.95;
  std::string statistic = "estimate";
  double param = 0.0;
};

struct SimulateRequest {
  int study = 1;
  SimOptions options;
  DgpConfig dgp;
};

// Full pipeline configuration: dataset + weight recipe + requested stages.
// Stages run in dependency order (load -> weights -> estimate -> the rest),
// each writing one JSON report (plus plot CSVs), with warnings aggregated
// into a top-level report.
struct AnalysisConfig {
  std::string data_path;
  std::string schema_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool quiet = false;
  WeightConfig weights;

  bool want_load_check = false;
  bool want_balance = false;
  bool want_estimate = false;
  std::optional<DecomposeRequest> decompose;
  std::optional<SensitivityRequest> sensitivity;
  std::optional<AmplifyRequest> amplify;
  std::optional<BenchmarkRequest> benchmark;
  std::optional<BootstrapRequest> bootstrap;
  std::optional<SimulateRequest> simulate;

  static AnalysisConfig from_json_file(const std::string& path);
};

// Runs the configured stages; returns the process exit code
// (0 ok, 2 config error, 3 data error, 4 numerical failure).
int run_analysis(const AnalysisConfig& config);

int exit_code_for(Error::Kind kind);

}  // namespace cosens
