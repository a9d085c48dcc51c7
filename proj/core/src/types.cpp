#include "cosens/types.hpp"

namespace cosens {

const char* to_string(Estimand e) {
  switch (e) {
    case Estimand::att: return "att";
    case Estimand::ato: return "ato";
    case Estimand::ate: return "ate";
  }
  return "?";
}

const char* to_string(Conditioning c) {
  return c == Conditioning::cud ? "cud" : "cod";
}

const char* to_string(WeightSource s) {
  switch (s) {
    case WeightSource::propensity: return "propensity";
    case WeightSource::balancing: return "balancing";
    case WeightSource::external: return "external";
  }
  return "?";
}

const char* to_string(CovariateLevel l) {
  return l == CovariateLevel::unit ? "unit" : "cluster";
}

const char* to_string(SensModel m) { return m == SensModel::msm ? "msm" : "vbm"; }

Estimand estimand_from_string(const std::string& s) {
  if (s == "att") return Estimand::att;
  if (s == "ato") return Estimand::ato;
  if (s == "ate") return Estimand::ate;
  throw_config("unknown estimand '" + s + "' (expected att, ato or ate)");
}

Conditioning conditioning_from_string(const std::string& s) {
  if (s == "cud") return Conditioning::cud;
  if (s == "cod") return Conditioning::cod;
  throw_config("unknown conditioning set '" + s + "' (expected cud or cod)");
}

SensModel sens_model_from_string(const std::string& s) {
  if (s == "msm") return SensModel::msm;
  if (s == "vbm") return SensModel::vbm;
  throw_config("unknown sensitivity model '" + s + "' (expected msm or vbm)");
}

}  // namespace cosens
