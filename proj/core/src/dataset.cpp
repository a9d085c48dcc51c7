#include "cosens/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "cosens/csv.hpp"
#include "json_io.hpp"

namespace cosens {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

// ---------------------------------------------------------------------------
// SchemaConfig

SchemaConfig SchemaConfig::from_json_file(const std::string& path) {
  ojson j = load_json_file(path);
  SchemaConfig s;
  auto require_string = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) {
      throw_config("schema file " + path + " is missing string key '" + key + "'");
    }
    return j[key].get<std::string>();
  };
  s.unit_id = require_string("unit_id");
  s.cluster_id = require_string("cluster_id");
  s.outcome = require_string("outcome");
  s.treatment = require_string("treatment");
  auto read_list = [&](const char* key, std::vector<std::string>* out) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw_config("schema key '" + std::string(key) + "' must be a list");
    for (const auto& e : j[key]) out->push_back(e.get<std::string>());
  };
  read_list("unit_covariates", &s.unit_covariates);
  read_list("cluster_covariates", &s.cluster_covariates);
  if (j.contains("cluster_file")) s.cluster_file = j["cluster_file"].get<std::string>();
  if (j.contains("treatment_level") &&
      j["treatment_level"].get<std::string>() != "cluster") {
    throw_config("only cluster-level treatment is supported");
  }
  s.validate_roles();
  return s;
}

void SchemaConfig::validate_roles() const {
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& name, const char* role) {
    if (name.empty()) throw_config(std::string("schema role '") + role + "' is empty");
    if (!seen.insert(name).second) {
      throw_config("schema column '" + name + "' is assigned to more than one role");
    }
  };
  add(unit_id, "unit_id");
  add(cluster_id, "cluster_id");
  add(outcome, "outcome");
  add(treatment, "treatment");
  for (const auto& c : unit_covariates) add(c, "unit_covariates");
  for (const auto& c : cluster_covariates) add(c, "cluster_covariates");
}

// ---------------------------------------------------------------------------
// CosDataset

CosDataset::CosDataset(std::vector<UnitRecord> units,
                       std::vector<ClusterRecord> clusters,
                       std::vector<std::string> x_names,
                       std::vector<std::string> k_names)
    : units_(std::move(units)),
      clusters_(std::move(clusters)),
      x_names_(std::move(x_names)),
      k_names_(std::move(k_names)) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    if (!by_id.emplace(clusters_[c].cluster_id, c).second) {
      throw_data("duplicate cluster id '" + clusters_[c].cluster_id + "'");
    }
  }
  cluster_index_.reserve(units_.size());
  for (const auto& u : units_) {
    auto it = by_id.find(u.cluster_id);
    if (it == by_id.end()) {
      throw_data("unit '" + u.unit_id + "' references unknown cluster '" +
                 u.cluster_id + "'");
    }
    cluster_index_.push_back(it->second);
  }
  cluster_arm_.reserve(clusters_.size());
  for (const auto& c : clusters_) cluster_arm_.push_back(c.a);
  for (std::size_t i = 0; i < units_.size(); ++i) {
    if (arm(i) == 1) ++n1_;
  }
  validate();
}

void CosDataset::validate() const {
  std::vector<std::size_t> counts(clusters_.size(), 0);
  for (std::size_t i = 0; i < units_.size(); ++i) ++counts[cluster_index_[i]];

  bool any_treated = false, any_control = false;
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    const auto& cl = clusters_[c];
    if (cl.a != 0 && cl.a != 1) {
      throw_data("cluster '" + cl.cluster_id + "' has non-binary treatment");
    }
    (cl.a == 1 ? any_treated : any_control) = true;
    if (cl.k.size() != k_names_.size()) {
      throw_data("cluster '" + cl.cluster_id + "' has wrong covariate length");
    }
    if (!all_finite(cl.k)) {
      throw_data("cluster '" + cl.cluster_id + "' has non-finite covariates");
    }
    if (cl.n_units != counts[c]) {
      throw_data("cluster '" + cl.cluster_id + "' declares " +
                 std::to_string(cl.n_units) + " units but has " +
                 std::to_string(counts[c]));
    }
  }
  if (!any_treated) throw_data("no treated cluster in dataset");
  if (!any_control) throw_data("no control cluster in dataset");

  for (const auto& u : units_) {
    if (u.x.size() != x_names_.size()) {
      throw_data("unit '" + u.unit_id + "' has wrong covariate length");
    }
    if (!all_finite(u.x) || !std::isfinite(u.y)) {
      throw_data("unit '" + u.unit_id + "' has a missing or non-finite value");
    }
  }
}

std::vector<double> CosDataset::covariate_column(const std::string& name) const {
  for (std::size_t j = 0; j < x_names_.size(); ++j) {
    if (x_names_[j] == name) {
      std::vector<double> col(units_.size());
      for (std::size_t i = 0; i < units_.size(); ++i) col[i] = units_[i].x[j];
      return col;
    }
  }
  for (std::size_t j = 0; j < k_names_.size(); ++j) {
    if (k_names_[j] == name) {
      std::vector<double> col(units_.size());
      for (std::size_t i = 0; i < units_.size(); ++i) {
        col[i] = clusters_[cluster_index_[i]].k[j];
      }
      return col;
    }
  }
  throw_config("unknown covariate '" + name + "'");
}

bool CosDataset::has_covariate(const std::string& name, CovariateLevel* level) const {
  for (const auto& x : x_names_) {
    if (x == name) {
      if (level) *level = CovariateLevel::unit;
      return true;
    }
  }
  for (const auto& k : k_names_) {
    if (k == name) {
      if (level) *level = CovariateLevel::cluster;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::size_t require_column(const CsvTable& t, const std::string& name,
                           const std::string& path) {
  std::size_t idx = t.column(name);
  if (idx == CsvTable::npos) {
    throw_data("column '" + name + "' not found in " + path);
  }
  return idx;
}

int parse_treatment(const std::string& cell, const std::string& context) {
  double v = parse_double(cell, context);
  if (v != 0.0 && v != 1.0) {
    throw_data("treatment value '" + cell + "' in " + context +
               " is not 0 or 1");
  }
  return static_cast<int>(v);
}

}  // namespace

CosDataset load_dataset(const std::string& csv_path, const SchemaConfig& schema) {
  schema.validate_roles();
  CsvTable t = read_csv(csv_path);

  const std::size_t c_unit = require_column(t, schema.unit_id, csv_path);
  const std::size_t c_cluster = require_column(t, schema.cluster_id, csv_path);
  const std::size_t c_outcome = require_column(t, schema.outcome, csv_path);

  // Cluster-level roles can come from the unit file, a companion file, or both.
  const bool has_companion = !schema.cluster_file.empty();
  const std::size_t c_treat = t.column(schema.treatment);
  std::vector<std::size_t> c_kcols;
  bool unit_file_has_k = true;
  for (const auto& name : schema.cluster_covariates) {
    std::size_t idx = t.column(name);
    if (idx == CsvTable::npos) unit_file_has_k = false;
    c_kcols.push_back(idx);
  }
  if (!has_companion) {
    if (c_treat == CsvTable::npos) {
      throw_data("column '" + schema.treatment + "' not found in " + csv_path);
    }
    for (std::size_t j = 0; j < c_kcols.size(); ++j) {
      if (c_kcols[j] == CsvTable::npos) {
        throw_data("column '" + schema.cluster_covariates[j] + "' not found in " +
                   csv_path);
      }
    }
  }

  std::vector<std::size_t> c_xcols;
  for (const auto& name : schema.unit_covariates) {
    c_xcols.push_back(require_column(t, name, csv_path));
  }

  std::vector<UnitRecord> units;
  units.reserve(t.rows.size());
  std::vector<ClusterRecord> clusters;
  std::unordered_map<std::string, std::size_t> cluster_pos;

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string context = csv_path + " row " + std::to_string(r + 2);

    UnitRecord u;
    u.unit_id = row[c_unit];
    u.cluster_id = row[c_cluster];
    u.y = parse_double(row[c_outcome], context);
    u.x.reserve(c_xcols.size());
    for (std::size_t idx : c_xcols) u.x.push_back(parse_double(row[idx], context));

    std::size_t ci;
    auto it = cluster_pos.find(u.cluster_id);
    if (it == cluster_pos.end()) {
      ci = clusters.size();
      cluster_pos.emplace(u.cluster_id, ci);
      ClusterRecord c;
      c.cluster_id = u.cluster_id;
      c.a = -1;  // filled below
      clusters.push_back(std::move(c));
    } else {
      ci = it->second;
    }
    ClusterRecord& cl = clusters[ci];
    ++cl.n_units;

    if (c_treat != CsvTable::npos) {
      int a = parse_treatment(row[c_treat], context);
      if (cl.a == -1) {
        cl.a = a;
      } else if (cl.a != a) {
        throw_data("cluster '" + cl.cluster_id +
                   "' mixes treated and control rows (all-or-none exposure "
                   "violated)");
      }
    }
    if (unit_file_has_k && !c_kcols.empty()) {
      std::vector<double> k;
      k.reserve(c_kcols.size());
      for (std::size_t idx : c_kcols) k.push_back(parse_double(row[idx], context));
      if (cl.k.empty()) {
        cl.k = std::move(k);
      } else if (cl.k != k) {
        throw_data("cluster covariates are not constant within cluster '" +
                   cl.cluster_id + "'");
      }
    }
    units.push_back(std::move(u));
  }

  if (has_companion) {
    CsvTable ct = read_csv(schema.cluster_file);
    const std::size_t cc_id = require_column(ct, schema.cluster_id, schema.cluster_file);
    const std::size_t cc_treat = require_column(ct, schema.treatment, schema.cluster_file);
    std::vector<std::size_t> cc_k;
    for (const auto& name : schema.cluster_covariates) {
      cc_k.push_back(require_column(ct, name, schema.cluster_file));
    }
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < ct.rows.size(); ++r) {
      const auto& row = ct.rows[r];
      const std::string context = schema.cluster_file + " row " + std::to_string(r + 2);
      const std::string& id = row[cc_id];
      if (!seen.insert(id).second) {
        throw_data("duplicate cluster '" + id + "' in " + schema.cluster_file);
      }
      auto it = cluster_pos.find(id);
      if (it == cluster_pos.end()) {
        throw_data("cluster '" + id + "' in " + schema.cluster_file +
                   " has no units in " + csv_path);
      }
      ClusterRecord& cl = clusters[it->second];
      int a = parse_treatment(row[cc_treat], context);
      if (cl.a != -1 && cl.a != a) {
        throw_data("treatment for cluster '" + id +
                   "' disagrees between unit and cluster files");
      }
      cl.a = a;
      std::vector<double> k;
      for (std::size_t idx : cc_k) k.push_back(parse_double(row[idx], context));
      if (!cl.k.empty() && cl.k != k) {
        throw_data("cluster covariates for '" + id +
                   "' disagree between unit and cluster files");
      }
      cl.k = std::move(k);
    }
    for (const auto& cl : clusters) {
      if (cl.a == -1) {
        throw_data("cluster '" + cl.cluster_id + "' missing from " +
                   schema.cluster_file);
      }
    }
  }

  if (units.empty()) throw_data("no treated cluster in dataset (file has no rows)");

  return CosDataset(std::move(units), std::move(clusters),
                    schema.unit_covariates, schema.cluster_covariates);
}

void write_dataset(const CosDataset& ds, const std::string& csv_path) {
  CsvTable t;
  t.header = {"unit_id", "cluster_id", "treatment", "outcome"};
  for (const auto& n : ds.x_names()) t.header.push_back(n);
  for (const auto& n : ds.k_names()) t.header.push_back(n);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto& u = ds.units()[i];
    const auto& c = ds.clusters()[ds.cluster_index(i)];
    std::vector<std::string> row = {u.unit_id, u.cluster_id,
                                    std::to_string(c.a), format_double(u.y)};
    for (double v : u.x) row.push_back(format_double(v));
    for (double v : c.k) row.push_back(format_double(v));
    t.rows.push_back(std::move(row));
  }
  write_csv(csv_path, t);
}

SchemaConfig written_dataset_schema(const CosDataset& ds) {
  SchemaConfig s;
  s.unit_id = "unit_id";
  s.cluster_id = "cluster_id";
  s.treatment = "treatment";
  s.outcome = "outcome";
  s.unit_covariates = ds.x_names();
  s.cluster_covariates = ds.k_names();
  return s;
}

// ---------------------------------------------------------------------------
// Balance

namespace {

struct ArmStats {
  double mean = 0.0;
  double wmean = 0.0;
  double var = 0.0;  // 1/n convention
};

ArmStats arm_stats(const CosDataset& ds, const std::vector<double>& col,
                   const WeightSet* w, int arm) {
  double sum = 0.0, wsum = 0.0, wysum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.arm(i) != arm) continue;
    sum += col[i];
    ++n;
    if (w) {
      wsum += w->values[i];
      wysum += w->values[i] * col[i];
    }
  }
  ArmStats s;
  s.mean = sum / static_cast<double>(n);
  s.wmean = w ? (wsum > 0 ? wysum / wsum : s.mean) : s.mean;
  double ss = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.arm(i) != arm) continue;
    double d = col[i] - s.mean;
    ss += d * d;
  }
  s.var = ss / static_cast<double>(n);
  return s;
}

}  // namespace

std::vector<StdDiff> standardized_differences(const CosDataset& ds,
                                              const WeightSet* w) {
  if (w && w->values.size() != ds.n()) {
    throw_contract("weight vector does not match dataset");
  }
  std::vector<StdDiff> out;
  auto push = [&](const std::string& name, CovariateLevel level) {
    std::vector<double> col = ds.covariate_column(name);
    ArmStats t = arm_stats(ds, col, w, 1);
    ArmStats c = arm_stats(ds, col, w, 0);
    double pooled = std::sqrt(0.5 * (t.var + c.var));
    StdDiff d{name, level, 0.0, false};
    if (pooled <= 0.0) {
      d.degenerate = true;
    } else {
      d.value = (t.wmean - c.wmean) / pooled;
    }
    out.push_back(std::move(d));
  };
  for (const auto& n : ds.x_names()) push(n, CovariateLevel::unit);
  for (const auto& n : ds.k_names()) push(n, CovariateLevel::cluster);
  return out;
}

}  // namespace cosens
