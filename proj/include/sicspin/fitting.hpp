#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sicspin/errors.hpp"
#include "sicspin/trace.hpp"

namespace sicspin {

// Damped least-squares (Levenberg-Marquardt) fitting engine.
//
// Numeric Jacobians (central differences, relative step 1e-6 with a 1e-9
// absolute floor), multiplicative damping adaptation, internal column
// equilibration, and the damped step solved by Householder QR on the stacked
// system [J; sqrt(lambda) I] -- poorly scaled parameterizations (e.g. raw
// polynomial coefficients spanning 15 orders of magnitude) stay solvable.
// Bounds are enforced by projection after each step; a parameter whose lower
// and upper bound coincide is held fixed and excluded from the solve.

struct FitModel {
  std::string name;
  std::vector<std::string> param_names;
  // Raw parametric curve; must accept any parameter vector without validation.
  std::function<double(double x, std::span<const double> params)> eval;
  // Data-driven starting point; throws HeuristicError when features cannot
  // be extracted. May be empty.
  std::function<std::vector<double>(const SignalTrace&)> default_guess;
  std::string x_unit;  // expected abscissa unit tag, "" = any

  std::size_t n_params() const { return param_names.size(); }
};

struct ParamBounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool fixed() const { return lo == hi; }
};

struct FitProblem {
  const FitModel* model = nullptr;
  std::vector<double> initial_guess;
  std::vector<ParamBounds> bounds;  // empty = all parameters unbounded
  int max_iterations = 200;
  double tolerance = 1e-14;  // relative chi^2 change / scaled gradient

  void validate(std::size_t n_points) const {
    if (model == nullptr) throw ValidationError("fit problem: no model");
    if (initial_guess.size() != model->n_params())
      throw ValidationError("fit problem: initial guess has " +
                            std::to_string(initial_guess.size()) + " entries, model '" +
                            model->name + "' has " + std::to_string(model->n_params()) +
                            " parameters");
    if (!bounds.empty() && bounds.size() != model->n_params())
      throw ValidationError("fit problem: bounds size mismatch");
    if (!(tolerance > 0.0)) throw ValidationError("fit problem: tolerance must be > 0");
    if (max_iterations < 1) throw ValidationError("fit problem: max_iterations must be >= 1");
    std::size_t active = model->n_params();
    for (std::size_t j = 0; j < bounds.size(); ++j) {
      if (bounds[j].lo > bounds[j].hi)
        throw ValidationError("fit problem: bounds inverted for parameter " +
                              model->param_names[j]);
      if (bounds[j].fixed()) --active;
      if (initial_guess[j] < bounds[j].lo || initial_guess[j] > bounds[j].hi)
        throw ValidationError("fit problem: initial guess for " + model->param_names[j] +
                              " outside bounds");
    }
    if (n_points < active + 1)
      throw ValidationError("fit problem: " + std::to_string(n_points) +
                            " data points cannot constrain " + std::to_string(active) +
                            " free parameters");
  }
};

struct FitResult {
  std::vector<double> parameters;
  std::vector<double> standard_errors;
  Eigen::MatrixXd covariance;
  double r_squared = 0.0;
  double chi_squared = 0.0;  // weighted residual sum of squares
  int iterations = 0;        // outer LM iterations (one Jacobian each)
  int accepted_steps = 0;
  bool converged = false;
  std::vector<double> chi2_history;  // initial value, then after each accepted step
};

// Determination coefficient 1 - SS_res/SS_tot about the data mean;
// 1 by convention when the data carry no variance (tested against the
// rounding floor of the mean, not exact zero).
inline double r_squared(std::span<const double> y, std::span<const double> prediction) {
  if (y.size() != prediction.size())
    throw ValidationError("r_squared: length mismatch");
  if (y.empty()) return 1.0;
  double mean = 0.0, y_scale = 0.0;
  for (double v : y) {
    mean += v;
    y_scale = std::max(y_scale, std::abs(v));
  }
  mean /= static_cast<double>(y.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += (y[i] - prediction[i]) * (y[i] - prediction[i]);
  }
  const double eps_floor = 1e-15 * y_scale;
  if (ss_tot <= static_cast<double>(y.size()) * eps_floor * eps_floor * 64.0) return 1.0;
  return 1.0 - ss_res / ss_tot;
}

inline double r_squared(const SignalTrace& data, std::span<const double> prediction) {
  return r_squared(std::span<const double>(data.y), prediction);
}

namespace detail {

inline std::string degenerate_direction_string(const Eigen::VectorXd& scaled_dir,
                                               const Eigen::VectorXd& inv_scale,
                                               const std::vector<std::string>& names,
                                               const std::vector<int>& active_to_full) {
  // Map the scaled-space null direction back to parameter space and list the
  // dominant components.
  Eigen::VectorXd dir = scaled_dir.cwiseProduct(inv_scale);
  dir.normalize();
  std::string out;
  for (int j = 0; j < dir.size(); ++j) {
    if (std::abs(dir[j]) < 0.15) continue;
    if (!out.empty()) out += (dir[j] >= 0 ? " + " : " - ");
    else if (dir[j] < 0) out += "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", std::abs(dir[j]));
    out += std::string(buf) + "*" + names[static_cast<std::size_t>(active_to_full[j])];
  }
  return out.empty() ? "(no dominant component)" : out;
}

}  // namespace detail

inline FitResult fit(const FitProblem& prob, const SignalTrace& data) {
  data.validate();
  prob.validate(data.size());
  const FitModel& model = *prob.model;
  const std::size_t n = data.size();
  const std::size_t p = model.n_params();

  std::vector<ParamBounds> bounds = prob.bounds;
  if (bounds.empty()) bounds.assign(p, ParamBounds{});
  std::vector<int> active;  // indices of free parameters
  for (std::size_t j = 0; j < p; ++j)
    if (!bounds[j].fixed()) active.push_back(static_cast<int>(j));
  const std::size_t pa = active.size();
  if (pa == 0) throw ValidationError("fit problem: all parameters fixed");

  std::vector<double> weights(n, 1.0);
  const bool have_sigma = !data.sigma_y.empty();
  if (have_sigma)
    for (std::size_t i = 0; i < n; ++i) weights[i] = 1.0 / data.sigma_y[i];

  std::vector<double> theta = prob.initial_guess;
  for (std::size_t j = 0; j < p; ++j) theta[j] = std::clamp(theta[j], bounds[j].lo, bounds[j].hi);

  auto predict = [&](const std::vector<double>& th, std::vector<double>& out) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = model.eval(data.x[i], th);
  };
  auto chi2_of = [&](const std::vector<double>& pred) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = weights[i] * (data.y[i] - pred[i]);
      c += r * r;
    }
    return c;
  };

  std::vector<double> pred, pred_trial, th_plus, th_minus;
  predict(theta, pred);
  double chi2 = chi2_of(pred);
  if (!std::isfinite(chi2))
    throw ValidationError("fit problem: model not finite at the initial guess");

  FitResult result;
  result.chi2_history.push_back(chi2);

  Eigen::MatrixXd jac(n, pa);
  Eigen::VectorXd resid(n), scale(pa);
  auto fill_residual = [&](const std::vector<double>& pr) {
    for (std::size_t i = 0; i < n; ++i) resid[i] = weights[i] * (data.y[i] - pr[i]);
  };
  fill_residual(pred);

  auto fill_jacobian = [&]() {
    th_plus = theta;
    th_minus = theta;
    std::vector<double> f_plus(n), f_minus(n);
    for (std::size_t jj = 0; jj < pa; ++jj) {
      const std::size_t j = static_cast<std::size_t>(active[jj]);
      const double h = std::max(1e-6 * std::abs(theta[j]), 1e-9);
      th_plus[j] = theta[j] + h;
      th_minus[j] = theta[j] - h;
      predict(th_plus, f_plus);
      predict(th_minus, f_minus);
      for (std::size_t i = 0; i < n; ++i)
        jac(i, jj) = weights[i] * (f_plus[i] - f_minus[i]) / (2.0 * h);
      th_plus[j] = theta[j];
      th_minus[j] = theta[j];
    }
    for (std::size_t jj = 0; jj < pa; ++jj)
      scale[jj] = std::max(jac.col(jj).norm(), 1e-300);
  };

  double lambda = 1e-3;
  bool converged = false;
  bool last_accepted = true;  // start optimistic: try the pure GN step first
  const double tol = prob.tolerance;

  for (int iter = 1; iter <= prob.max_iterations; ++iter) {
    result.iterations = iter;
    fill_jacobian();
    Eigen::MatrixXd jac_scaled = jac * scale.cwiseInverse().asDiagonal();
    const double grad_inf = (jac_scaled.transpose() * resid).lpNorm<Eigen::Infinity>();
    if (grad_inf <= tol * (1.0 + std::sqrt(chi2))) {
      converged = true;
      break;
    }

    // Step with damping lambda_eff; lambda_eff = 0 is the undamped
    // Gauss-Newton step solved by rank-revealing QR.
    const auto try_step = [&](double lambda_eff, std::vector<double>& trial) {
      Eigen::VectorXd step_scaled;
      if (lambda_eff == 0.0) {
        step_scaled = jac_scaled.colPivHouseholderQr().solve(resid);
      } else {
        Eigen::MatrixXd stacked(n + pa, pa);
        stacked.topRows(n) = jac_scaled;
        stacked.bottomRows(pa) = std::sqrt(lambda_eff) *
                                 Eigen::MatrixXd::Identity(static_cast<int>(pa),
                                                           static_cast<int>(pa));
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + pa);
        rhs.head(n) = resid;
        step_scaled = stacked.householderQr().solve(rhs);
      }
      trial = theta;
      for (std::size_t jj = 0; jj < pa; ++jj) {
        const std::size_t j = static_cast<std::size_t>(active[jj]);
        trial[j] = std::clamp(theta[j] + step_scaled[jj] / scale[jj], bounds[j].lo, bounds[j].hi);
      }
      predict(trial, pred_trial);
      return chi2_of(pred_trial);
    };

    bool accepted = false;
    bool gn_attempted = false;
    while (true) {
      double lambda_eff = lambda;
      if (last_accepted && !gn_attempted) {
        lambda_eff = 0.0;  // after progress, trust the quadratic model fully
        gn_attempted = true;
      } else if (lambda > 1e14) {
        break;
      }
      std::vector<double> trial;
      const double chi2_trial = try_step(lambda_eff, trial);
      if (std::isfinite(chi2_trial) && chi2_trial < chi2) {
        theta = trial;
        pred = pred_trial;
        const double chi2_prev = chi2;
        chi2 = chi2_trial;
        fill_residual(pred);
        result.chi2_history.push_back(chi2);
        ++result.accepted_steps;
        if (lambda_eff > 0.0) lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (chi2_prev - chi2 <= tol * std::max(chi2, 1e-300)) converged = true;
        break;
      }
      if (lambda_eff > 0.0) lambda *= 4.0;
    }
    last_accepted = accepted;
    if (!accepted) {
      // Damping exhausted: no descent direction left; stationary within
      // numerical resolution.
      converged = (jac_scaled.transpose() * resid).lpNorm<Eigen::Infinity>() <=
                  std::sqrt(tol) * (1.0 + std::sqrt(chi2));
      break;
    }
    if (converged) break;
  }

  result.parameters = theta;
  result.chi_squared = chi2;
  result.converged = converged;

  // Covariance from the (scaled) normal matrix at the solution.
  fill_jacobian();
  Eigen::MatrixXd jac_scaled = jac * scale.cwiseInverse().asDiagonal();
  Eigen::MatrixXd normal = jac_scaled.transpose() * jac_scaled;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normal);
  const double eig_max = es.eigenvalues().maxCoeff();
  const double eig_floor = 1e-12 * std::max(eig_max, 1e-300);
  if (es.eigenvalues().minCoeff() < eig_floor) {
    std::string dirs;
    const Eigen::VectorXd inv_scale = scale.cwiseInverse();
    for (int k = 0; k < es.eigenvalues().size(); ++k) {
      if (es.eigenvalues()[k] >= eig_floor) continue;
      if (!dirs.empty()) dirs += "; ";
      dirs += detail::degenerate_direction_string(es.eigenvectors().col(k), inv_scale,
                                                  model.param_names, active);
    }
    throw DegenerateFitError("fit of model '" + model.name +
                             "': J^T J is singular at the solution; unconstrained parameter "
                             "direction(s): " + dirs);
  }
  Eigen::MatrixXd cov_scaled = es.eigenvectors() *
                               es.eigenvalues().cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose();
  Eigen::MatrixXd cov_active = scale.cwiseInverse().asDiagonal() * cov_scaled *
                               scale.cwiseInverse().asDiagonal();
  if (!have_sigma && n > pa) cov_active *= chi2 / static_cast<double>(n - pa);

  result.covariance = Eigen::MatrixXd::Zero(static_cast<int>(p), static_cast<int>(p));
  for (std::size_t a = 0; a < pa; ++a)
    for (std::size_t b = 0; b < pa; ++b)
      result.covariance(active[a], active[b]) = cov_active(static_cast<int>(a),
                                                           static_cast<int>(b));
  result.covariance = 0.5 * (result.covariance + result.covariance.transpose()).eval();
  result.standard_errors.resize(p, 0.0);
  for (std::size_t j = 0; j < p; ++j)
    result.standard_errors[j] = std::sqrt(std::max(result.covariance(j, j), 0.0));

  result.r_squared = r_squared(std::span<const double>(data.y), pred);
  return result;
}

// Dispatch to the model's guess heuristic.
inline std::vector<double> initial_guess(const FitModel& model, const SignalTrace& data) {
  data.validate();
  if (!model.default_guess)
    throw HeuristicError("model '" + model.name + "' has no initial-guess heuristic");
  return model.default_guess(data);
}

}  // namespace sicspin
