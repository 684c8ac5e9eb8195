#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sicspin/constants.hpp"
#include "sicspin/errors.hpp"
#include "sicspin/fitting.hpp"
#include "sicspin/signal_models.hpp"
#include "sicspin/temperature_models.hpp"
#include "sicspin/trace.hpp"

namespace sicspin {

// Named fit models binding the closed-form signal and temperature shapes to
// the LM engine, each with a data-driven initial-guess heuristic.

namespace detail {

inline double vec_mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double vec_median(std::span<const double> v) {
  std::vector<double> c(v.begin(), v.end());
  std::sort(c.begin(), c.end());
  const std::size_t n = c.size();
  return n % 2 ? c[n / 2] : 0.5 * (c[n / 2 - 1] + c[n / 2]);
}

inline void check_not_flat(std::span<const double> y, const std::string& model) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  if (*hi - *lo <= 1e-12 * std::max(1.0, scale))
    throw HeuristicError("initial guess for '" + model + "': trace is flat");
}

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinFit regress_line(std::span<const double> u, std::span<const double> v) {
  const std::size_t n = u.size();
  if (n < 2) throw HeuristicError("regression needs at least two points");
  double su = 0, sv = 0, suu = 0, suv = 0;
  for (std::size_t i = 0; i < n; ++i) {
    su += u[i];
    sv += v[i];
    suu += u[i] * u[i];
    suv += u[i] * v[i];
  }
  const double denom = n * suu - su * su;
  if (denom == 0.0) throw HeuristicError("regression abscissa has no spread");
  LinFit f;
  f.slope = (n * suv - su * sv) / denom;
  f.intercept = (sv - f.slope * su) / n;
  return f;
}

// Location of the largest discrete-spectrum power peak of (x, y) scanned over
// [f_lo, f_hi], refined parabolically. Works on non-uniform grids.
inline double dominant_frequency(std::span<const double> x, std::span<const double> y,
                                 double f_lo, double f_hi, int n_scan = 2048,
                                 double exclude_lo = 0.0, double exclude_hi = 0.0) {
  const std::size_t n = x.size();
  std::vector<double> power(static_cast<std::size_t>(n_scan), 0.0);
  const double df = (f_hi - f_lo) / (n_scan - 1);
  int best = -1;
  double best_p = -1.0;
  for (int k = 0; k < n_scan; ++k) {
    const double f = f_lo + k * df;
    if (f > exclude_lo && f < exclude_hi) continue;
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = 2.0 * pi * f * x[i];
      re += y[i] * std::cos(ph);
      im += y[i] * std::sin(ph);
    }
    power[static_cast<std::size_t>(k)] = re * re + im * im;
    if (power[static_cast<std::size_t>(k)] > best_p) {
      best_p = power[static_cast<std::size_t>(k)];
      best = k;
    }
  }
  if (best < 0) throw HeuristicError("frequency scan found no peak");
  double f_peak = f_lo + best * df;
  if (best > 0 && best + 1 < n_scan) {
    const double pm = power[static_cast<std::size_t>(best - 1)];
    const double p0 = power[static_cast<std::size_t>(best)];
    const double pp = power[static_cast<std::size_t>(best + 1)];
    const double denom = pm - 2 * p0 + pp;
    if (denom < 0.0) f_peak += 0.5 * df * (pm - pp) / denom;
  }
  return f_peak;
}

// (x, value) pairs at strict local maxima of y above `threshold`.
inline std::vector<std::pair<double, double>> local_maxima(std::span<const double> x,
                                                           std::span<const double> y,
                                                           double threshold) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] > threshold && y[i] >= y[i - 1] && y[i] >= y[i + 1]) out.emplace_back(x[i], y[i]);
  return out;
}

// Decay constant of an exponential envelope through the points (t_k, p_k):
// regression of ln p on t. Returns fallback when the envelope cannot be
// resolved.
inline double envelope_decay_time(const std::vector<std::pair<double, double>>& peaks,
                                  double fallback) {
  if (peaks.size() < 2) return fallback;
  std::vector<double> t, lp;
  for (const auto& [tk, pk] : peaks) {
    t.push_back(tk);
    lp.push_back(std::log(pk));
  }
  const LinFit f = regress_line(t, lp);
  return f.slope < 0.0 ? -1.0 / f.slope : fallback;
}

// Same for a Gaussian envelope: ln p regressed on t^2.
inline double gaussian_envelope_time(const std::vector<std::pair<double, double>>& peaks,
                                     double fallback) {
  if (peaks.size() < 2) return fallback;
  std::vector<double> t2, lp;
  for (const auto& [tk, pk] : peaks) {
    t2.push_back(tk * tk);
    lp.push_back(std::log(pk));
  }
  const LinFit f = regress_line(t2, lp);
  return f.slope < 0.0 ? 1.0 / std::sqrt(-f.slope) : fallback;
}

inline double half_width_around(std::span<const double> x, std::span<const double> dev,
                                std::size_t peak, double fallback) {
  const double half = 0.5 * std::abs(dev[peak]);
  double left = x[peak], right = x[peak];
  for (std::size_t i = peak; i-- > 0;) {
    left = x[i];
    if (std::abs(dev[i]) < half) break;
  }
  for (std::size_t i = peak + 1; i < dev.size(); ++i) {
    right = x[i];
    if (std::abs(dev[i]) < half) break;
  }
  return right > left ? right - left : fallback;
}

inline std::vector<double> guess_lorentzian2(const SignalTrace& data) {
  check_not_flat(data.y, "lorentzian2");
  const auto& x = data.x;
  const auto& y = data.y;
  const std::size_t n = y.size();
  const double baseline = vec_median(y);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = y[i] - baseline;

  std::size_t i1 = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(dev[i]) > std::abs(dev[i1])) i1 = i;
  const double span_x = x.back() - x.front();
  const double w1 = half_width_around(x, dev, i1, span_x / 20.0);

  std::size_t i2 = n;  // sentinel
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(x[i] - x[i1]) < 3.0 * w1) continue;
    if (i2 == n || std::abs(dev[i]) > std::abs(dev[i2])) i2 = i;
  }
  if (i2 == n || std::abs(dev[i2]) < 0.05 * std::abs(dev[i1]))
    throw HeuristicError("initial guess for 'lorentzian2': second peak not found");
  const double w2 = half_width_around(x, dev, i2, span_x / 20.0);

  double c1 = x[i1], a1 = dev[i1], f1 = w1;
  double c2 = x[i2], a2 = dev[i2], f2 = w2;
  if (c1 > c2) {
    std::swap(c1, c2);
    std::swap(a1, a2);
    std::swap(f1, f2);
  }
  return {baseline, c1, f1, a1, c2, f2, a2};
}

inline std::vector<double> guess_ramsey(const SignalTrace& data) {
  check_not_flat(data.y, "ramsey");
  const auto& x = data.x;
  const auto& y = data.y;
  const std::size_t n = y.size();
  const double b = vec_mean(y);
  std::vector<double> dev(n), absdev(n);
  double a0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dev[i] = y[i] - b;
    absdev[i] = std::abs(dev[i]);
    a0 = std::max(a0, absdev[i]);
  }
  const double span_x = x.back() - x.front();
  double min_dx = span_x;
  for (std::size_t i = 0; i + 1 < n; ++i) min_dx = std::min(min_dx, x[i + 1] - x[i]);
  const double f = dominant_frequency(x, dev, 1.0 / span_x, 0.5 / min_dx);
  if (f * span_x < 1.5)
    throw HeuristicError("initial guess for 'ramsey': fewer than two oscillation periods");
  const double t2s = gaussian_envelope_time(local_maxima(x, absdev, 0.1 * a0), 0.5 * span_x);
  const double phi = std::acos(std::clamp(dev[0] / a0, -1.0, 1.0));
  return {a0, t2s, f, phi, b};
}

inline std::vector<double> guess_eseem(const SignalTrace& data) {
  check_not_flat(data.y, "eseem");
  const auto& x = data.x;
  const auto& y = data.y;
  const std::size_t n = y.size();
  const std::size_t n_tail = std::max<std::size_t>(3, n / 10);
  double d = 0.0;
  for (std::size_t i = n - n_tail; i < n; ++i) d += y[i];
  d /= static_cast<double>(n_tail);
  const double a = y.front() - d;
  if (std::abs(a) < 1e-12)
    throw HeuristicError("initial guess for 'eseem': no decay amplitude");
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = y[i] - d;
  const double span_x = x.back() - x.front();
  const double t2 = envelope_decay_time(local_maxima(x, dev, 0.05 * std::abs(a)),
                                        0.5 * span_x);

  // Divide out the decay before scanning for the modulation frequencies; the
  // raw trace's spectrum is swamped by the broadband envelope.
  std::vector<double> zt, zs;
  for (std::size_t i = 0; i < n; ++i) {
    const double env = a * std::exp(-x[i] / t2);
    if (std::abs(env) < 0.05 * std::abs(a)) break;
    zt.push_back(x[i]);
    zs.push_back(dev[i] / env);
  }
  if (zt.size() < 8)
    throw HeuristicError("initial guess for 'eseem': decay too fast to resolve modulation");

  // An imperfect T2 estimate leaves a slow baseline drift in z whose
  // broadband spectrum can drown the weaker Larmor line; take out a
  // quadratic trend before scanning.
  {
    Eigen::MatrixXd v(zt.size(), 3);
    Eigen::VectorXd rhs(zt.size());
    for (std::size_t i = 0; i < zt.size(); ++i) {
      v(static_cast<int>(i), 0) = 1.0;
      v(static_cast<int>(i), 1) = zt[i];
      v(static_cast<int>(i), 2) = zt[i] * zt[i];
      rhs[static_cast<int>(i)] = zs[i];
    }
    const Eigen::Vector3d c = v.colPivHouseholderQr().solve(rhs);
    for (std::size_t i = 0; i < zt.size(); ++i)
      zs[i] -= c[0] + zt[i] * (c[1] + zt[i] * c[2]);
  }

  const double z_span = zt.back() - zt.front();
  double min_dx = z_span;
  for (std::size_t i = 0; i + 1 < zt.size(); ++i) min_dx = std::min(min_dx, zt[i + 1] - zt[i]);
  const double fa = dominant_frequency(zt, zs, 1.0 / z_span, 0.5 / min_dx);
  // the two nuclear species have comparable gyromagnetic ratios, so the
  // second line sits within a small factor of the first
  const double fb = dominant_frequency(zt, zs, std::max(1.0 / z_span, fa / 2.5),
                                       std::min(0.5 / min_dx, 2.5 * fa), 2048, 0.9 * fa,
                                       1.1 * fa);
  return {a, t2, 0.5, 0.4, std::max(fa, fb), std::min(fa, fb), d};
}

inline std::vector<double> guess_exp_decay(const SignalTrace& data) {
  check_not_flat(data.y, "t1");
  const auto& x = data.x;
  const auto& y = data.y;
  const std::size_t n = y.size();
  const std::size_t n_tail = std::max<std::size_t>(3, n / 10);
  double b = 0.0;
  for (std::size_t i = n - n_tail; i < n; ++i) b += y[i];
  b /= static_cast<double>(n_tail);
  const double a = y.front() - b;
  if (std::abs(a) < 1e-12) throw HeuristicError("initial guess for 't1': no decay amplitude");
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (y[i] - b) * (a > 0 ? 1.0 : -1.0);
    if (s > 0.05 * std::abs(a)) {
      ts.push_back(x[i]);
      ls.push_back(std::log(s));
    }
  }
  double t1 = (x.back() - x.front()) / 3.0;
  if (ts.size() >= 2) {
    const LinFit f = regress_line(ts, ls);
    if (f.slope < 0.0) t1 = -1.0 / f.slope;
  }
  return {a, t1, b};
}

inline std::vector<double> guess_debye(const SignalTrace& data) {
  check_not_flat(data.y, "debye");
  const auto& x = data.x;
  const auto& y = data.y;
  const double d_front = y.front(), d_back = y.back();
  if (!(d_front > d_back))
    throw HeuristicError("initial guess for 'debye': data not decreasing");
  const double mid = 0.5 * (d_front + d_back);
  double x_half = 0.5 * (x.front() + x.back());
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] <= mid) {
      x_half = x[i];
      break;
    }
  const double curv = std::log(2.0) / std::max(x_half * x_half, 1e-6);
  const double e_front = std::exp(-curv * x.front() * x.front());
  const double e_back = std::exp(-curv * x.back() * x.back());
  const double amp = (d_front - d_back) / std::max(e_front - e_back, 1e-12);
  return {d_front - amp * e_front, amp, curv};
}

inline std::vector<double> guess_varshni(const SignalTrace& data) {
  check_not_flat(data.y, "varshni");
  const auto& x = data.x;
  const auto& y = data.y;
  const double beta = x.back();
  const double drop = y.front() - y.back();
  if (!(drop > 0.0))
    throw HeuristicError("initial guess for 'varshni': data not decreasing");
  const double alpha = drop * (beta + x.back()) / (x.back() * x.back());
  return {y.front(), alpha, beta};
}

// Linear least squares on scaled monomials; for a polynomial the "guess" is
// already the solution.
inline std::vector<double> guess_poly5(const SignalTrace& data) {
  const std::size_t n = data.size();
  if (n < 7) throw HeuristicError("initial guess for 'poly5': needs at least 7 points");
  const double xs = std::max(std::abs(data.x.front()), std::abs(data.x.back()));
  if (xs == 0.0) throw HeuristicError("initial guess for 'poly5': zero abscissa span");
  Eigen::MatrixXd v(n, 6);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = data.x[i] / xs;
    double acc = 1.0;
    for (int k = 0; k < 6; ++k) {
      v(static_cast<int>(i), k) = acc;
      acc *= u;
    }
    rhs[static_cast<int>(i)] = data.y[i];
  }
  const Eigen::VectorXd sol = v.colPivHouseholderQr().solve(rhs);
  std::vector<double> out(6);
  double scale = 1.0;
  for (int k = 0; k < 6; ++k) {
    out[static_cast<std::size_t>(k)] = sol[k] / scale;
    scale *= xs;
  }
  return out;
}

inline std::vector<double> guess_t1_linear(const SignalTrace& data) {
  check_not_flat(data.y, "t1-linear");
  const LinFit f = regress_line(data.x, data.y);
  return {std::max(f.slope, 0.0), f.intercept};
}

inline std::vector<double> guess_t1_raman(const SignalTrace& data, int s) {
  check_not_flat(data.y, "t1-raman");
  const std::size_t n = data.size();
  Eigen::MatrixXd v(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = data.x[i];
    if (!(t > 0.0))
      throw HeuristicError("initial guess for 't1-raman': temperatures must be positive");
    v(static_cast<int>(i), 0) = 1.0;
    v(static_cast<int>(i), 1) = t;
    v(static_cast<int>(i), 2) = t * t;
    rhs[static_cast<int>(i)] = data.y[i] / std::pow(t, s);
  }
  const Eigen::VectorXd sol = v.colPivHouseholderQr().solve(rhs);
  return {std::max(sol[0], 0.0), std::max(sol[1], 0.0), std::max(sol[2], 0.0)};
}

}  // namespace detail

// Model for the two-phonon relaxation rate with exponent s = 2d - 1.
inline FitModel make_raman_fit_model(int dimension_d) {
  const int s = raman_exponent(dimension_d);
  FitModel m;
  m.name = "t1-raman";
  m.param_names = {"a", "b", "c"};
  m.x_unit = "k";
  m.eval = [s](double t, std::span<const double> q) {
    return detail::raman_rate(q[0], q[1], q[2], s, t);
  };
  m.default_guess = [s](const SignalTrace& d) { return detail::guess_t1_raman(d, s); };
  return m;
}

inline const FitModel& fit_model(std::string_view name) {
  static const FitModel lorentzian2 = [] {
    FitModel m;
    m.name = "lorentzian2";
    m.param_names = {"offset",     "center1_mhz", "fwhm1_mhz", "amplitude1",
                     "center2_mhz", "fwhm2_mhz",  "amplitude2"};
    m.x_unit = "mhz";
    m.eval = [](double f, std::span<const double> q) {
      return q[0] + detail::lorentzian_term(f, q[1], q[2], q[3]) +
             detail::lorentzian_term(f, q[4], q[5], q[6]);
    };
    m.default_guess = detail::guess_lorentzian2;
    return m;
  }();
  static const FitModel ramsey = [] {
    FitModel m;
    m.name = "ramsey";
    m.param_names = {"a", "t2_star_us", "delta_mhz", "phi_rad", "b"};
    m.x_unit = "us";
    m.eval = [](double tau, std::span<const double> q) {
      return detail::ramsey_value(tau, q[0], q[1], q[2], q[3], q[4]);
    };
    m.default_guess = detail::guess_ramsey;
    return m;
  }();
  static const FitModel eseem = [] {
    FitModel m;
    m.name = "eseem";
    m.param_names = {"a", "t2_us", "b_depth", "c_depth", "f1_mhz", "f2_mhz", "d_offset"};
    m.x_unit = "us";
    m.eval = [](double tau, std::span<const double> q) {
      return detail::eseem_value(tau, q[0], q[1], q[2], q[3], q[4], q[5], q[6]);
    };
    m.default_guess = detail::guess_eseem;
    return m;
  }();
  static const FitModel t1 = [] {
    FitModel m;
    m.name = "t1";
    m.param_names = {"a", "t1_us", "b"};
    m.x_unit = "us";
    m.eval = [](double tau, std::span<const double> q) {
      return detail::exp_decay_value(tau, q[0], q[1], q[2]);
    };
    m.default_guess = detail::guess_exp_decay;
    return m;
  }();
  static const FitModel debye = [] {
    FitModel m;
    m.name = "debye";
    m.param_names = {"d_floor_mhz", "amplitude_mhz", "curvature_per_k2"};
    m.x_unit = "k";
    m.eval = [](double t, std::span<const double> q) {
      return q[0] + q[1] * std::exp(-q[2] * t * t);
    };
    m.default_guess = detail::guess_debye;
    return m;
  }();
  static const FitModel varshni = [] {
    FitModel m;
    m.name = "varshni";
    m.param_names = {"d_zero_mhz", "alpha_mhz_per_k", "beta_k"};
    m.x_unit = "k";
    m.eval = [](double t, std::span<const double> q) {
      return q[0] - q[1] * t * t / (q[2] + t);
    };
    m.default_guess = detail::guess_varshni;
    return m;
  }();
  static const FitModel poly5 = [] {
    FitModel m;
    m.name = "poly5";
    m.param_names = {"c0", "c1", "c2", "c3", "c4", "c5"};
    m.x_unit = "k";
    m.eval = [](double t, std::span<const double> q) {
      double acc = 0.0;
      for (std::size_t i = q.size(); i-- > 0;) acc = acc * t + q[i];
      return acc;
    };
    m.default_guess = detail::guess_poly5;
    return m;
  }();
  static const FitModel t1_linear = [] {
    FitModel m;
    m.name = "t1-linear";
    m.param_names = {"a_prime_per_ms_k", "c_prime_per_ms"};
    m.x_unit = "k";
    m.eval = [](double t, std::span<const double> q) { return q[0] * t + q[1]; };
    m.default_guess = detail::guess_t1_linear;
    return m;
  }();
  static const FitModel t1_raman = make_raman_fit_model(2);

  if (name == "lorentzian2") return lorentzian2;
  if (name == "ramsey") return ramsey;
  if (name == "eseem") return eseem;
  if (name == "t1") return t1;
  if (name == "debye") return debye;
  if (name == "varshni") return varshni;
  if (name == "poly5") return poly5;
  if (name == "t1-linear") return t1_linear;
  if (name == "t1-raman") return t1_raman;
  throw ValidationError(
      "unknown fit model '" + std::string(name) +
      "' (expected lorentzian2, ramsey, eseem, t1, debye, varshni, poly5, t1-linear or "
      "t1-raman)");
}

inline const std::vector<std::string>& fit_model_names() {
  static const std::vector<std::string> names = {"lorentzian2", "ramsey",  "eseem",
                                                 "t1",          "debye",   "varshni",
                                                 "poly5",       "t1-linear", "t1-raman"};
  return names;
}

}  // namespace sicspin
