#pragma once

#include <array>
#include <cmath>
#include <string>
#include <variant>

#include "sicspin/errors.hpp"

namespace sicspin {

// Temperature dependence of the zero-field splitting D(T), three model
// families fitted to the same data, plus the spin-lattice relaxation rate
// models 1/T1(T). D in MHz, rates per millisecond, temperatures in kelvin.

// D = d_floor + amplitude * exp(-curvature * T^2); monotone decreasing for
// T > 0 when amplitude and curvature are positive.
struct DebyeDParams {
  double d_floor_mhz;
  double amplitude_mhz;
  double curvature_per_k2;

  constexpr DebyeDParams(double d_floor, double amplitude, double curvature)
      : d_floor_mhz(d_floor), amplitude_mhz(amplitude), curvature_per_k2(curvature) {
    if (!(amplitude_mhz > 0.0)) throw ValidationError("Debye D(T): amplitude must be > 0");
    if (!(curvature_per_k2 > 0.0)) throw ValidationError("Debye D(T): curvature must be > 0");
  }
};

// D = d_zero - alpha * T^2 / (beta + T). The alpha coefficient carries
// MHz/K so the formula yields MHz.
struct VarshniDParams {
  double d_zero_mhz;
  double alpha_mhz_per_k;
  double beta_k;

  constexpr VarshniDParams(double d_zero, double alpha, double beta)
      : d_zero_mhz(d_zero), alpha_mhz_per_k(alpha), beta_k(beta) {
    if (!(beta_k > 0.0)) throw ValidationError("Varshni D(T): beta must be > 0");
  }
};

// D = sum_{n=0..5} c_n T^n with c_n in MHz K^-n.
struct PolynomialDParams {
  std::array<double, 6> coefficients;
};

namespace detail {
inline void check_temperature_nonnegative(double t_k) {
  if (!(t_k >= 0.0))
    throw ValidationError("temperature " + std::to_string(t_k) + " K must be >= 0");
}
}  // namespace detail

inline double evaluate_d(const DebyeDParams& m, double t_k) {
  detail::check_temperature_nonnegative(t_k);
  return m.d_floor_mhz + m.amplitude_mhz * std::exp(-m.curvature_per_k2 * t_k * t_k);
}

inline double evaluate_d(const VarshniDParams& m, double t_k) {
  detail::check_temperature_nonnegative(t_k);
  return m.d_zero_mhz - m.alpha_mhz_per_k * t_k * t_k / (m.beta_k + t_k);
}

inline double evaluate_d(const PolynomialDParams& m, double t_k) {
  detail::check_temperature_nonnegative(t_k);
  double acc = 0.0;  // Horner
  for (std::size_t i = m.coefficients.size(); i-- > 0;) acc = acc * t_k + m.coefficients[i];
  return acc;
}

// Thermometry: recover T from a measured D on a monotone-decreasing Debye
// branch by bisection, to |dT| < 1e-4 K (well below typical cryostat
// controller accuracy of 1e-3 K).
inline double invert_d_to_temperature(const DebyeDParams& m, double d_target_mhz,
                                      double t_lo_k, double t_hi_k) {
  if (!(t_lo_k >= 0.0 && t_hi_k <= 400.0 && t_lo_k < t_hi_k))
    throw ValidationError("thermometry: temperature range must satisfy 0 <= lo < hi <= 400 K");
  const double d_max = evaluate_d(m, t_lo_k);
  const double d_min = evaluate_d(m, t_hi_k);
  if (!(d_target_mhz >= d_min && d_target_mhz <= d_max))
    throw ValidationError("thermometry: D = " + std::to_string(d_target_mhz) +
                          " MHz outside achievable range [" + std::to_string(d_min) + ", " +
                          std::to_string(d_max) + "] MHz on [" + std::to_string(t_lo_k) + ", " +
                          std::to_string(t_hi_k) + "] K");
  double lo = t_lo_k, hi = t_hi_k;
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (evaluate_d(m, mid) >= d_target_mhz)
      lo = mid;  // D decreasing: target lies at or above mid
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// 1/T1(T) models. Energy scales are stored as temperature equivalents
// (E/k_B in kelvin) to avoid a second unit system.

inline int raman_exponent(int dimension_d) {
  if (dimension_d < 1 || dimension_d > 3)
    throw ValidationError("Raman model: sample dimension must be 1, 2 or 3");
  return 2 * dimension_d - 1;
}

// 1/T1 = a coth(theta1/T) + b / (exp(theta2/T) - 1) + c
struct CothOrbachParams {
  double a_per_ms;
  double theta1_k;  // E1 / k_B
  double b_per_ms;
  double theta2_k;  // E2 / k_B
  double c_per_ms;

  constexpr CothOrbachParams(double a, double theta1, double b, double theta2, double c)
      : a_per_ms(a), theta1_k(theta1), b_per_ms(b), theta2_k(theta2), c_per_ms(c) {
    if (!(theta1_k > 0.0)) throw ValidationError("coth-Orbach: E1/kB must be > 0 K");
    if (!(theta2_k > 0.0)) throw ValidationError("coth-Orbach: E2/kB must be > 0 K");
    if (!(a_per_ms >= 0.0) || !(b_per_ms >= 0.0))
      throw ValidationError("coth-Orbach: rate coefficients a, b must be >= 0");
  }
};

// High-temperature limit of the one-phonon terms: 1/T1 = a' T + c'.
struct LinearT1Params {
  double a_prime_per_ms_k;
  double c_prime_per_ms;

  constexpr LinearT1Params(double a_prime, double c_prime)
      : a_prime_per_ms_k(a_prime), c_prime_per_ms(c_prime) {
    if (!(a_prime_per_ms_k >= 0.0)) throw ValidationError("linear 1/T1: a' must be >= 0");
  }
};

// Two-phonon Raman process: 1/T1 = a T^s + b T^(s+1) + c T^(s+2),
// s = 2d - 1 with d the sample dimension (d = 2 near a surface).
struct RamanT1Params {
  double a;
  double b;
  double c;
  int dimension_d;

  constexpr RamanT1Params(double a_, double b_, double c_, int d_)
      : a(a_), b(b_), c(c_), dimension_d(d_) {
    if (dimension_d < 1 || dimension_d > 3)
      throw ValidationError("Raman model: sample dimension must be 1, 2 or 3");
    if (!(a >= 0.0) || !(b >= 0.0) || !(c >= 0.0))
      throw ValidationError("Raman model: rate coefficients must be >= 0");
  }
};

using T1RateModel = std::variant<CothOrbachParams, LinearT1Params, RamanT1Params>;

namespace detail {
inline void check_temperature_positive(double t_k) {
  if (!(t_k > 0.0))
    throw ValidationError("temperature " + std::to_string(t_k) + " K must be > 0");
}

// Raw formula shared with the fit-model registry (no parameter validation).
inline double raman_rate(double a, double b, double c, int s, double t_k) {
  const double ts = std::pow(t_k, s);
  return ts * (a + t_k * (b + t_k * c));
}
}  // namespace detail

inline double evaluate_t1_rate(const CothOrbachParams& m, double t_k) {
  detail::check_temperature_positive(t_k);
  const double direct = m.a_per_ms / std::tanh(m.theta1_k / t_k);
  const double orbach = m.b_per_ms / std::expm1(m.theta2_k / t_k);
  return direct + orbach + m.c_per_ms;
}

inline double evaluate_t1_rate(const LinearT1Params& m, double t_k) {
  detail::check_temperature_positive(t_k);
  return m.a_prime_per_ms_k * t_k + m.c_prime_per_ms;
}

inline double evaluate_t1_rate(const RamanT1Params& m, double t_k) {
  detail::check_temperature_positive(t_k);
  return detail::raman_rate(m.a, m.b, m.c, raman_exponent(m.dimension_d), t_k);
}

inline double evaluate_t1_rate(const T1RateModel& m, double t_k) {
  return std::visit([t_k](const auto& v) { return evaluate_t1_rate(v, t_k); }, m);
}

// ---------------------------------------------------------------------------
// Published D(T) calibration coefficient sets for N2+-implanted 4H-SiC
// divacancy (PL6) ensembles: high-fluence sample "A" (1e14 cm^-2) and
// low-fluence sample "B" (1e13 cm^-2).
namespace calib {
inline constexpr DebyeDParams debye_sample_a{1304.1, 60.6, 2.7e-6};
inline constexpr DebyeDParams debye_sample_b{1301.3, 64.3, 2.5e-6};
inline constexpr VarshniDParams varshni_sample_a{1364.7, 0.2, 1348.2};
inline constexpr VarshniDParams varshni_sample_b{1365.6, 0.2, 1268.3};
inline constexpr PolynomialDParams poly_sample_a{
    {1364.6, 3.5e-3, -1.8e-4, -1.5e-7, 1.6e-9, -2.7e-12}};
inline constexpr PolynomialDParams poly_sample_b{
    {1365.4, 1.2e-2, -3.5e-4, 8.8e-7, -4.2e-10, -2.2e-12}};
}  // namespace calib

}  // namespace sicspin
