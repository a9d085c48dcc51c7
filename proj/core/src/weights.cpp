#include "cosens/weights.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "cosens/csv.hpp"

namespace cosens {

namespace {

struct Design {
  Eigen::MatrixXd X;  // n x p, first column is the intercept
  std::vector<std::string> names;
};

// Unit-level design for the conditioning set, minus any omitted covariates.
Design build_design(const CosDataset& ds, Conditioning conditioning,
                    const std::vector<std::string>& omit) {
  std::unordered_set<std::string> omitted(omit.begin(), omit.end());
  for (const auto& name : omit) {
    if (!ds.has_covariate(name)) {
      throw_config("cannot omit unknown covariate '" + name + "'");
    }
  }
  std::vector<std::string> cols;
  for (const auto& n : ds.k_names()) {
    if (!omitted.count(n)) cols.push_back(n);
  }
  if (conditioning == Conditioning::cud) {
    for (const auto& n : ds.x_names()) {
      if (!omitted.count(n)) cols.push_back(n);
    }
  }
  Design d;
  d.names.push_back("(intercept)");
  for (const auto& n : cols) d.names.push_back(n);
  d.X.resize(static_cast<Eigen::Index>(ds.n()), static_cast<Eigen::Index>(cols.size() + 1));
  d.X.col(0).setOnes();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    std::vector<double> col = ds.covariate_column(cols[j]);
    for (std::size_t i = 0; i < ds.n(); ++i) {
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = col[i];
    }
  }
  return d;
}

// Names the dependent columns of a rank-deficient design.
[[noreturn]] void throw_singular(const Design& d, const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr) {
  const auto rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  std::string names;
  for (Eigen::Index j = rank; j < d.X.cols(); ++j) {
    if (!names.empty()) names += ", ";
    names += d.names[static_cast<std::size_t>(perm[j])];
  }
  throw_numeric("design matrix is rank deficient; collinear columns: " + names);
}

void check_full_rank(const Design& d) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  qr.setThreshold(1e-10);
  if (qr.rank() < d.X.cols()) throw_singular(d, qr);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double group_mean(const std::vector<double>& v, const std::vector<int>& arms, int arm) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (arms[i] == arm) {
      s += v[i];
      ++n;
    }
  }
  if (n == 0) throw_numeric("empty weighted group");
  return s / static_cast<double>(n);
}

void rescale_group(std::vector<double>& v, const std::vector<int>& arms, int arm) {
  double mean = group_mean(v, arms, arm);
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw_numeric("degenerate weights: group mean is zero or non-finite");
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (arms[i] == arm) v[i] /= mean;
  }
}

std::vector<int> dataset_arms(const CosDataset& ds) {
  std::vector<int> arms(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) arms[i] = ds.arm(i);
  return arms;
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic propensity fit (IRLS)

PropensityFit fit_propensity(const CosDataset& ds, Conditioning conditioning,
                             const PropensityOptions& options) {
  return fit_propensity(ds, conditioning, {}, options);
}

PropensityFit fit_propensity(const CosDataset& ds, Conditioning conditioning,
                             const std::vector<std::string>& omit,
                             const PropensityOptions& options) {
  if (options.ridge < 0) throw_config("ridge must be nonnegative");
  Design d = build_design(ds, conditioning, omit);
  if (options.ridge == 0.0) check_full_rank(d);

  const Eigen::Index n = d.X.rows();
  const Eigen::Index p = d.X.cols();
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < ds.n(); ++i) y[static_cast<Eigen::Index>(i)] = ds.arm(i);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  PropensityFit fit;
  fit.conditioning = conditioning;
  fit.design_names = d.names;
  fit.arms = dataset_arms(ds);

  for (int it = 0; it < options.max_iter; ++it) {
    Eigen::VectorXd eta = d.X * beta;
    Eigen::VectorXd pi(n), w(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      pi[i] = sigmoid(eta[i]);
      w[i] = std::max(pi[i] * (1.0 - pi[i]), 1e-10);
      z[i] = eta[i] + (y[i] - pi[i]) / w[i];
    }
    Eigen::MatrixXd xw = d.X.transpose() * w.asDiagonal();
    Eigen::MatrixXd a = xw * d.X;
    if (options.ridge > 0) a.diagonal().array() += options.ridge;
    Eigen::VectorXd beta_new = a.ldlt().solve(xw * z);

    if (!beta_new.allFinite()) {
      throw_numeric("propensity fit diverged to non-finite coefficients");
    }
    if (options.ridge == 0.0 &&
        beta_new.cwiseAbs().maxCoeff() > kSeparationBound) {
      throw_numeric(
          "separation detected in the propensity fit (a coefficient exceeded " +
          std::to_string(static_cast<int>(kSeparationBound)) +
          "); refit with ridge > 0");
    }
    double delta = (beta_new - beta).cwiseAbs().maxCoeff();
    beta = beta_new;
    fit.iterations = it + 1;
    if (delta < options.tol) {
      fit.converged = true;
      break;
    }
  }

  const double trim = std::max(options.score_trim, kScoreClip);
  if (trim >= 0.5) throw_config("score_trim must be below 0.5");
  fit.coefficients.assign(beta.data(), beta.data() + p);
  fit.scores.resize(ds.n());
  Eigen::VectorXd eta = d.X * beta;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    double s = sigmoid(eta[static_cast<Eigen::Index>(i)]);
    if (s < trim) {
      s = trim;
      fit.any_clipped = true;
    } else if (s > 1.0 - trim) {
      s = 1.0 - trim;
      fit.any_clipped = true;
    }
    fit.scores[i] = s;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Estimand transforms

WeightSet weights_from_propensity(const PropensityFit& fit, Estimand estimand,
                                  bool hajek_normalize) {
  const std::size_t n = fit.scores.size();
  if (fit.arms.size() != n) throw_contract("propensity fit has no arm labels");
  WeightSet w;
  w.estimand = estimand;
  w.source = WeightSource::propensity;
  w.conditioning = fit.conditioning;
  w.clip_warning = fit.any_clipped;
  w.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pi = fit.scores[i];
    bool treated = fit.arms[i] == 1;
    switch (estimand) {
      case Estimand::att:
        w.values[i] = treated ? 1.0 : pi / (1.0 - pi);
        break;
      case Estimand::ato:
        w.values[i] = treated ? 1.0 - pi : pi;
        break;
      case Estimand::ate:
        w.values[i] = treated ? 1.0 / pi : 1.0 / (1.0 - pi);
        break;
    }
  }
  if (!hajek_normalize) return w;

  if (estimand == Estimand::att) {
    rescale_group(w.values, fit.arms, 0);
  } else {
    rescale_group(w.values, fit.arms, 0);
    rescale_group(w.values, fit.arms, 1);
  }
  w.normalized = true;
  return w;
}

// ---------------------------------------------------------------------------
// Entropy balancing

WeightSet balancing_weights(const CosDataset& ds, Estimand estimand,
                            const BalanceOptions& options) {
  return balancing_weights(ds, estimand, {}, options);
}

WeightSet balancing_weights(const CosDataset& ds, Estimand estimand,
                            const std::vector<std::string>& omit,
                            const BalanceOptions& options) {
  if (estimand != Estimand::att) {
    throw_config(
        "balancing weights support only the ATT estimand; use propensity "
        "weights for the ATO");
  }
  Design d = build_design(ds, Conditioning::cud, omit);
  const Eigen::Index p_all = d.X.cols();
  if (p_all < 2) throw_config("no covariates available to balance");

  std::vector<int> arms = dataset_arms(ds);
  std::vector<Eigen::Index> controls;
  Eigen::Index n1 = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (arms[i] == 0) controls.push_back(static_cast<Eigen::Index>(i));
    else ++n1;
  }

  // Balance targets the non-constant covariate columns; constant columns are
  // balanced by construction. Center at the treated means and standardize:
  // the exponential-tilt weights are invariant to this reparameterization.
  std::vector<Eigen::Index> active;
  std::vector<std::string> active_names;
  for (Eigen::Index j = 1; j < p_all; ++j) {
    double mean = d.X.col(j).mean();
    double ss = (d.X.col(j).array() - mean).square().sum() /
                static_cast<double>(d.X.rows());
    if (ss > 0) {
      active.push_back(j);
      active_names.push_back(d.names[static_cast<std::size_t>(j)]);
    }
  }
  const Eigen::Index p = static_cast<Eigen::Index>(active.size());

  Eigen::VectorXd target = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (arms[i] == 1) s += d.X(static_cast<Eigen::Index>(i), active[static_cast<std::size_t>(j)]);
    }
    target[j] = s / static_cast<double>(n1);
    double mean = d.X.col(active[static_cast<std::size_t>(j)]).mean();
    double ss = (d.X.col(active[static_cast<std::size_t>(j)]).array() - mean).square().sum() /
                static_cast<double>(d.X.rows());
    scale[j] = std::sqrt(ss);
  }

  Eigen::MatrixXd zc(static_cast<Eigen::Index>(controls.size()), p);
  for (Eigen::Index r = 0; r < zc.rows(); ++r) {
    for (Eigen::Index j = 0; j < p; ++j) {
      zc(r, j) = (d.X(controls[static_cast<std::size_t>(r)], active[static_cast<std::size_t>(j)]) -
                  target[j]) / scale[j];
    }
  }
  WeightSet w;
  w.estimand = Estimand::att;
  w.source = WeightSource::balancing;
  w.conditioning = Conditioning::cud;
  w.values.assign(ds.n(), 1.0);
  w.normalized = true;
  if (p == 0) return w;  // every covariate constant: already balanced

  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zc);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
      const auto& perm = qr.colsPermutation().indices();
      std::string names;
      for (Eigen::Index j = qr.rank(); j < p; ++j) {
        if (!names.empty()) names += ", ";
        names += active_names[static_cast<std::size_t>(perm[j])];
      }
      throw_numeric("balancing design is rank deficient; collinear columns: " + names);
    }
  }

  // Convex dual: log sum_{A=0} exp(theta'z) with the target centered at 0.
  auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                       Eigen::VectorXd* weights) {
    Eigen::VectorXd eta = zc * theta;
    double mx = eta.maxCoeff();
    Eigen::VectorXd e = (eta.array() - mx).exp();
    double denom = e.sum();
    if (grad) *grad = zc.transpose() * e / denom;
    if (weights) *weights = e / denom;
    return mx + std::log(denom);
  };

  // Raw-scale imbalance of a gradient component j is grad_j * scale_j.
  const double grad_tol = [&] {
    double smax = scale.maxCoeff();
    return options.tol / std::max(smax, 1.0);
  }();

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd grad(p);
  double f = objective(theta, &grad, nullptr);
  double step = options.step;
  bool converged = grad.cwiseAbs().maxCoeff() < grad_tol;

  for (int it = 0; it < options.max_iter && !converged; ++it) {
    double g2 = grad.squaredNorm();
    double s = step;
    Eigen::VectorXd theta_try;
    double f_try = 0.0;
    while (true) {
      theta_try = theta - s * grad;
      f_try = objective(theta_try, nullptr, nullptr);
      if (f_try <= f - 1e-4 * s * g2) break;
      s *= 0.5;
      if (s < 1e-14) {
        throw_numeric("entropy balancing line search stalled");
      }
    }
    theta = theta_try;
    step = s * 2.0;
    f = objective(theta, &grad, nullptr);
    if (theta.cwiseAbs().maxCoeff() > 1e4) {
      throw_numeric(
          "no feasible balance: the balancing dual diverged; consider the ATO "
          "estimand with propensity weights");
    }
    converged = grad.cwiseAbs().maxCoeff() < grad_tol;
  }
  if (!converged) {
    throw_numeric("entropy balancing did not reach the balance tolerance");
  }

  Eigen::VectorXd wc;
  objective(theta, nullptr, &wc);

  const double n0 = static_cast<double>(controls.size());
  for (std::size_t r = 0; r < controls.size(); ++r) {
    w.values[static_cast<std::size_t>(controls[r])] = wc[static_cast<Eigen::Index>(r)] * n0;
  }
  return w;  // softmax weights sum to 1, scaled to mean 1: normalized
}

// ---------------------------------------------------------------------------
// Normalization and external weights

WeightSet normalize(const WeightSet& w, const CosDataset& ds) {
  if (w.values.size() != ds.n()) throw_contract("weight vector does not match dataset");
  WeightSet out = w;
  std::vector<int> arms = dataset_arms(ds);
  if (w.estimand == Estimand::att) {
    rescale_group(out.values, arms, 0);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      if (arms[i] == 1) out.values[i] = 1.0;
    }
  } else {
    rescale_group(out.values, arms, 0);
    rescale_group(out.values, arms, 1);
  }
  out.normalized = true;
  return out;
}

WeightSet load_external_weights(const std::string& csv_path, const CosDataset& ds,
                                Estimand estimand) {
  CsvTable t = read_csv(csv_path);
  std::size_t c_id = t.column("unit_id");
  std::size_t c_w = t.column("weight");
  if (c_id == CsvTable::npos || c_w == CsvTable::npos) {
    throw_data("external weights CSV must have columns (unit_id, weight): " + csv_path);
  }
  std::unordered_map<std::string, double> by_id;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string context = csv_path + " row " + std::to_string(r + 2);
    double v = parse_double(t.rows[r][c_w], context);
    if (!(v >= 0.0)) throw_data("negative weight in " + context);
    if (!by_id.emplace(t.rows[r][c_id], v).second) {
      throw_data("duplicate unit_id '" + t.rows[r][c_id] + "' in " + csv_path);
    }
  }
  WeightSet w;
  w.estimand = estimand;
  w.source = WeightSource::external;
  w.values.resize(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    auto it = by_id.find(ds.units()[i].unit_id);
    if (it == by_id.end()) {
      throw_data("external weights missing unit '" + ds.units()[i].unit_id + "'");
    }
    w.values[i] = it->second;
  }
  return normalize(w, ds);
}

WeightSet fit_weights(const CosDataset& ds, const WeightConfig& config) {
  switch (config.source) {
    case WeightSource::propensity: {
      PropensityFit fit =
          fit_propensity(ds, config.conditioning, config.omit, config.propensity);
      return weights_from_propensity(fit, config.estimand);
    }
    case WeightSource::balancing:
      return balancing_weights(ds, config.estimand, config.omit, config.balance);
    case WeightSource::external:
      return load_external_weights(config.external_path, ds, config.estimand);
  }
  throw_contract("unreachable weight source");
}

}  // namespace cosens
