#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cosens/types.hpp"

namespace cosens {

struct UnitRecord {
  std::string unit_id;
  std::string cluster_id;
  std::vector<double> x;  // unit-level covariates, length d_x
  double y = 0.0;         // outcome
};

struct ClusterRecord {
  std::string cluster_id;
  int a = 0;              // cluster treatment, 0/1
  std::vector<double> k;  // cluster-level covariates, length d_k
  std::size_t n_units = 0;
};

// Column-role map for CSV ingestion. Cluster-level columns (treatment and
// cluster covariates) may live on the unit rows, in a companion cluster-level
// CSV, or in both (cross-checked for consistency).
struct SchemaConfig {
  std::string unit_id;
  std::string cluster_id;
  std::string outcome;
  std::string treatment;
  std::vector<std::string> unit_covariates;
  std::vector<std::string> cluster_covariates;
  std::string cluster_file;  // optional companion CSV path

  static SchemaConfig from_json_file(const std::string& path);
  void validate_roles() const;  // roles disjoint and non-empty
};

// Immutable clustered dataset: units nested in clusters, all-or-none
// exposure, at least one treated and one control cluster, no missing values.
class CosDataset {
 public:
  CosDataset(std::vector<UnitRecord> units, std::vector<ClusterRecord> clusters,
             std::vector<std::string> x_names, std::vector<std::string> k_names);

  const std::vector<UnitRecord>& units() const { return units_; }
  const std::vector<ClusterRecord>& clusters() const { return clusters_; }
  const std::vector<std::string>& x_names() const { return x_names_; }
  const std::vector<std::string>& k_names() const { return k_names_; }

  std::size_t n() const { return units_.size(); }
  std::size_t n1() const { return n1_; }
  std::size_t n0() const { return units_.size() - n1_; }
  std::size_t m() const { return clusters_.size(); }
  std::size_t d_x() const { return x_names_.size(); }
  std::size_t d_k() const { return k_names_.size(); }

  // Treatment arm of unit i (its cluster's treatment).
  int arm(std::size_t unit_index) const { return cluster_arm_[cluster_index_[unit_index]]; }
  std::size_t cluster_index(std::size_t unit_index) const { return cluster_index_[unit_index]; }

  // Unit-level expansion of a named covariate; cluster covariates are
  // broadcast so every unit carries its cluster's value.
  std::vector<double> covariate_column(const std::string& name) const;
  bool has_covariate(const std::string& name, CovariateLevel* level = nullptr) const;

 private:
  void validate() const;

  std::vector<UnitRecord> units_;
  std::vector<ClusterRecord> clusters_;
  std::vector<std::string> x_names_;
  std::vector<std::string> k_names_;
  std::vector<std::size_t> cluster_index_;  // per unit
  std::vector<int> cluster_arm_;            // per cluster
  std::size_t n1_ = 0;
};

CosDataset load_dataset(const std::string& csv_path, const SchemaConfig& schema);

// Writes a single unit-level CSV with cluster columns repeated per row.
// load_dataset over the implied schema reproduces the dataset exactly.
void write_dataset(const CosDataset& ds, const std::string& csv_path);
SchemaConfig written_dataset_schema(const CosDataset& ds);

struct StdDiff {
  std::string name;
  CovariateLevel level;
  double value = 0.0;
  bool degenerate = false;  // zero pooled standard deviation
};

// (Weighted) treated mean minus (weighted) control mean over the unweighted
// pooled standard deviation. Cluster covariates are expanded to unit level
// before averaging; weights, when given, are used Hajek-style within arm.
std::vector<StdDiff> standardized_differences(const CosDataset& ds,
                                              const WeightSet* w = nullptr);

}  // namespace cosens
