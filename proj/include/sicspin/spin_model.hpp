#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "sicspin/constants.hpp"
#include "sicspin/errors.hpp"

namespace sicspin {

// Spin-1 ground-state model of a c-axis divacancy:
//
//   H = D (Sz^2 - (2/3) I) + E (Sx^2 - Sy^2) + g (mu_B/h) B Sz
//
// expressed in MHz, with the static field B along the defect symmetry
// axis. Basis ordering is fixed as {|+1>, |0>, |-1>} everywhere.

using Eigen::Matrix3cd;

struct SpinOperators {
  Matrix3cd sx, sy, sz;
};

// Standard spin-1 matrices in the {|+1>, |0>, |-1>} basis.
inline const SpinOperators& spin1_operators() {
  static const SpinOperators ops = [] {
    const double r = 1.0 / std::sqrt(2.0);
    const std::complex<double> i(0.0, 1.0);
    SpinOperators o;
    o.sx << 0, r, 0,
            r, 0, r,
            0, r, 0;
    o.sy << 0, -i * r, 0,
            i * r, 0, -i * r,
            0, i * r, 0;
    o.sz << 1, 0, 0,
            0, 0, 0,
            0, 0, -1;
    return o;
  }();
  return ops;
}

struct SpinSystemParams {
  double d_zfs_mhz;
  double e_zfs_mhz;
  double g_factor;
  double b_field_t;

  SpinSystemParams(double d_mhz, double e_mhz = 0.0, double g = 2.0, double b_t = 0.0)
      : d_zfs_mhz(d_mhz), e_zfs_mhz(e_mhz), g_factor(g), b_field_t(b_t) {
    if (!(d_zfs_mhz > 0.0)) throw ValidationError("spin params: D must be > 0 MHz");
    if (!(e_zfs_mhz >= 0.0)) throw ValidationError("spin params: E must be >= 0 MHz");
    if (!(g_factor > 0.0)) throw ValidationError("spin params: g must be > 0");
    if (!(b_field_t >= 0.0)) throw ValidationError("spin params: B must be >= 0 T");
  }

  // Axial Zeeman shift g (mu_B/h) B in MHz.
  double zeeman_mhz() const { return g_factor * constants.bohr_magneton_mhz_per_t * b_field_t; }

  // The model assumes D >> E and B moderate; out-of-regime inputs are legal
  // but worth flagging to the user.
  std::vector<std::string> regime_notes() const {
    std::vector<std::string> notes;
    if (e_zfs_mhz > 0.1 * d_zfs_mhz)
      notes.push_back("E = " + std::to_string(e_zfs_mhz) +
                      " MHz is not small against D; closed forms remain exact but the D >> E "
                      "regime assumption is violated");
    if (zeeman_mhz() > d_zfs_mhz)
      notes.push_back("Zeeman shift exceeds D; the lower transition frequency is negative "
                      "(level crossing)");
    return notes;
  }
};

inline Matrix3cd build_hamiltonian(const SpinSystemParams& p) {
  const SpinOperators& s = spin1_operators();
  const Matrix3cd identity = Matrix3cd::Identity();
  return p.d_zfs_mhz * (s.sz * s.sz - (2.0 / 3.0) * identity) +
         p.e_zfs_mhz * (s.sx * s.sx - s.sy * s.sy) +
         p.zeeman_mhz() * s.sz;
}

struct TransitionFrequencies {
  double omega1_mhz;  // |0> <-> lower |+-1>-like state
  double omega2_mhz;  // |0> <-> upper |+-1>-like state
};

// Closed-form splittings of the |+-1> block against |0>:
// omega_{1,2} = D -+ sqrt((g mu_B B / h)^2 + E^2), so omega1 <= omega2.
inline TransitionFrequencies transition_frequencies(const SpinSystemParams& p) {
  const double root = std::hypot(p.zeeman_mhz(), p.e_zfs_mhz);
  return {p.d_zfs_mhz - root, p.d_zfs_mhz + root};
}

// D = (omega1 + omega2) / 2; the field-dependent part cancels in the mean.
inline double zfs_from_resonances(double omega1_mhz, double omega2_mhz) {
  if (!(omega1_mhz > 0.0) || !(omega2_mhz > 0.0))
    throw ValidationError("zfs_from_resonances: resonance frequencies must be positive");
  if (omega1_mhz > omega2_mhz)
    throw ValidationError("zfs_from_resonances: omega1 > omega2 (swapped resonances?)");
  return 0.5 * (omega1_mhz + omega2_mhz);
}

}  // namespace sicspin
