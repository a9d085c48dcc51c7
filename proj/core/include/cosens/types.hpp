#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cosens {

enum class Estimand { att, ato, ate };

// CUD conditions on cluster and unit covariates [1, K, X];
// COD conditions on cluster covariates only [1, K].
enum class Conditioning { cud, cod };

enum class WeightSource { propensity, balancing, external };

enum class CovariateLevel { unit, cluster };

enum class SensModel { msm, vbm };

const char* to_string(Estimand e);
const char* to_string(Conditioning c);
const char* to_string(WeightSource s);
const char* to_string(CovariateLevel l);
const char* to_string(SensModel m);

Estimand estimand_from_string(const std::string& s);
Conditioning conditioning_from_string(const std::string& s);
SensModel sens_model_from_string(const std::string& s);

// Toolkit-wide error. The kind drives CLI exit codes:
// config -> 2, data -> 3, numeric/contract -> 4.
class Error : public std::runtime_error {
 public:
  enum class Kind { config, data, numeric, contract };

  Error(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

[[noreturn]] inline void throw_config(const std::string& m) {
  throw Error(Error::Kind::config, m);
}
[[noreturn]] inline void throw_data(const std::string& m) {
  throw Error(Error::Kind::data, m);
}
[[noreturn]] inline void throw_numeric(const std::string& m) {
  throw Error(Error::Kind::numeric, m);
}
[[noreturn]] inline void throw_contract(const std::string& m) {
  throw Error(Error::Kind::contract, m);
}

// Per-unit nonnegative weights, aligned with the dataset's unit order.
// For ATT every treated unit carries weight 1; `normalized` means each
// weighted group averages to 1 (controls for ATT, each arm for ATO/ATE).
struct WeightSet {
  Estimand estimand = Estimand::att;
  std::vector<double> values;
  bool normalized = false;
  WeightSource source = WeightSource::propensity;
  bool clip_warning = false;  // some propensity score sat at a clipping boundary
  std::optional<Conditioning> conditioning;
};

}  // namespace cosens
