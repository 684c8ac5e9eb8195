#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "sicspin/constants.hpp"
#include "sicspin/errors.hpp"

namespace sicspin {

// Closed-form signal shapes. These double as simulation ground truth and as
// fit models; the raw formulas live in detail:: so the fit engine can
// evaluate them for arbitrary (possibly transiently unphysical) parameter
// vectors without tripping type validation.

namespace detail {

inline double lorentzian_term(double f, double center, double fwhm, double amplitude) {
  const double hw = 0.5 * fwhm;
  const double df = f - center;
  return amplitude * hw * hw / (df * df + hw * hw);
}

inline double ramsey_value(double tau, double a, double t2_star, double delta, double phi,
                           double b) {
  const double u = tau / t2_star;
  return a * std::exp(-u * u) * std::cos(2.0 * pi * delta * tau + phi) + b;
}

inline double eseem_value(double tau, double a, double t2, double b_depth, double c_depth,
                          double f1, double f2, double d) {
  const double s1 = std::sin(pi * f1 * tau);
  const double s2 = std::sin(pi * f2 * tau);
  return a * std::exp(-tau / t2) * (1.0 - b_depth * s1 * s1) * (1.0 - c_depth * s2 * s2) + d;
}

inline double exp_decay_value(double tau, double a, double t_decay, double b) {
  return a * std::exp(-tau / t_decay) + b;
}

}  // namespace detail

struct LorentzianPeak {
  double center_mhz;
  double fwhm_mhz;
  double amplitude;  // signed peak height; negative = dip

  LorentzianPeak(double center, double fwhm, double amplitude_)
      : center_mhz(center), fwhm_mhz(fwhm), amplitude(amplitude_) {
    if (!(fwhm_mhz > 0.0)) throw ValidationError("Lorentzian peak: FWHM must be > 0");
  }
};

// offset + sum of Lorentzians, each parameterized by full width at half
// maximum and signed height.
inline double lorentzian_spectrum(double f_mhz, std::span<const LorentzianPeak> peaks,
                                  double offset) {
  if (peaks.empty()) throw ValidationError("lorentzian_spectrum: needs at least one peak");
  double v = offset;
  for (const auto& p : peaks) v += detail::lorentzian_term(f_mhz, p.center_mhz, p.fwhm_mhz, p.amplitude);
  return v;
}

// a exp[-(tau/T2*)^2] cos(2 pi delta tau + phi) + b. The Gaussian envelope
// exponent is fixed at 2 (quasi-static Gaussian noise); fringe period 1/delta.
struct RamseyParams {
  double a;
  double t2_star_us;
  double delta_mhz;
  double phi_rad;
  double b;

  RamseyParams(double a_, double t2_star, double delta, double phi, double b_)
      : a(a_), t2_star_us(t2_star), delta_mhz(delta), phi_rad(phi), b(b_) {
    if (!(t2_star_us > 0.0)) throw ValidationError("Ramsey params: T2* must be > 0");
  }
};

inline double ramsey_signal(double tau_us, const RamseyParams& p) {
  if (!(tau_us >= 0.0)) throw ValidationError("ramsey_signal: tau must be >= 0");
  return detail::ramsey_value(tau_us, p.a, p.t2_star_us, p.delta_mhz, p.phi_rad, p.b);
}

// a exp(-tau/T2) [1 - b sin^2(pi f1 tau)] [1 - c sin^2(pi f2 tau)] + d,
// f1 and f2 the 13C / 29Si nuclear Larmor frequencies. By convention f1 is
// the larger of the two at a fixed field (13C).
struct EseemParams {
  double a;
  double t2_us;
  double b_depth;
  double c_depth;
  double f1_mhz;
  double f2_mhz;
  double d_offset;

  EseemParams(double a_, double t2, double b_depth_, double c_depth_, double f1, double f2,
              double d)
      : a(a_), t2_us(t2), b_depth(b_depth_), c_depth(c_depth_), f1_mhz(f1), f2_mhz(f2),
        d_offset(d) {
    if (!(t2_us > 0.0)) throw ValidationError("ESEEM params: T2 must be > 0");
    if (!(b_depth >= 0.0 && b_depth <= 1.0) || !(c_depth >= 0.0 && c_depth <= 1.0))
      throw ValidationError("ESEEM params: modulation depths must lie in [0, 1]");
    if (!(f1_mhz >= 0.0) || !(f2_mhz >= 0.0))
      throw ValidationError("ESEEM params: frequencies must be >= 0");
  }

  // Modulation factor alone (used when injecting ESEEM into the echo simulator).
  double modulation(double tau_us) const {
    const double s1 = std::sin(pi * f1_mhz * tau_us);
    const double s2 = std::sin(pi * f2_mhz * tau_us);
    return (1.0 - b_depth * s1 * s1) * (1.0 - c_depth * s2 * s2);
  }
};

inline double eseem_signal(double tau_us, const EseemParams& p) {
  if (!(tau_us >= 0.0)) throw ValidationError("eseem_signal: tau must be >= 0");
  return detail::eseem_value(tau_us, p.a, p.t2_us, p.b_depth, p.c_depth, p.f1_mhz, p.f2_mhz,
                             p.d_offset);
}

// a exp(-tau/T1) + b
struct T1DecayParams {
  double a;
  double t1_us;
  double b;

  T1DecayParams(double a_, double t1, double b_) : a(a_), t1_us(t1), b(b_) {
    if (!(t1_us > 0.0)) throw ValidationError("T1 decay params: T1 must be > 0");
  }
};

inline double t1_decay_signal(double tau_us, const T1DecayParams& p) {
  if (!(tau_us >= 0.0)) throw ValidationError("t1_decay_signal: tau must be >= 0");
  return detail::exp_decay_value(tau_us, p.a, p.t1_us, p.b);
}

// a cos(Omega_R t) + b; the pi/2 pulse duration is pi/(2 Omega_R).
inline double rabi_signal(double t_us, double omega_r_rad_per_us, double a, double b) {
  if (!(t_us >= 0.0)) throw ValidationError("rabi_signal: t must be >= 0");
  if (!(omega_r_rad_per_us > 0.0)) throw ValidationError("rabi_signal: Omega_R must be > 0");
  return a * std::cos(omega_r_rad_per_us * t_us) + b;
}

// Nuclear Larmor frequency: gyromagnetic coefficient times field.
inline double larmor_frequency(double gyro_mhz_per_t, double b_field_t) {
  if (!(b_field_t >= 0.0)) throw ValidationError("larmor_frequency: B must be >= 0");
  return gyro_mhz_per_t * b_field_t;
}

// Deterministic, order-independent evaluation over an abscissa array.
template <typename F>
std::vector<double> sample(F&& f, std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(f(x));
  return out;
}

}  // namespace sicspin
