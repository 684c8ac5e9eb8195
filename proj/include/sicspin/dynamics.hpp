#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sicspin/constants.hpp"
#include "sicspin/errors.hpp"
#include "sicspin/rng.hpp"
#include "sicspin/signal_models.hpp"
#include "sicspin/spin_model.hpp"
#include "sicspin/trace.hpp"

namespace sicspin {

// First-principles pulse-sequence simulator.
//
// The microwave addresses one spin transition at a time, so the dynamics are
// reduced to the driven two-level subspace {|0>, |-1>} (omega1) or
// {|0>, |+1>} (omega2) in the rotating frame of the microwave, under the
// rotating-wave approximation. Drive segments are exact 2x2 rotations with
// generalized Rabi frequency sqrt(Omega_R^2 + (2 pi delta)^2); free segments
// apply exact phase and decay factors. No ODE integrator is involved.
//
// Dephasing is modeled as a quasi-static Gaussian detuning frozen per
// Monte-Carlo shot; relaxation as amplitude damping (T1) and pure dephasing
// (T2_pure) during free evolution. Shot randomness is counter-based on
// (rng_seed, stream, shot), so traces are bit-identical for a fixed seed
// regardless of evaluation order.

enum class SegmentKind { Drive, FreeEvolution };

struct PulseSegment {
  SegmentKind kind = SegmentKind::FreeEvolution;
  double duration_us = 0.0;
  double rabi_rad_per_us = 0.0;  // Drive only
  double phase_rad = 0.0;        // Drive only
  double detuning_mhz = 0.0;     // Drive only

  static PulseSegment drive(double duration_us, double rabi_rad_per_us, double phase_rad = 0.0,
                            double detuning_mhz = 0.0) {
    PulseSegment s;
    s.kind = SegmentKind::Drive;
    s.duration_us = duration_us;
    s.rabi_rad_per_us = rabi_rad_per_us;
    s.phase_rad = phase_rad;
    s.detuning_mhz = detuning_mhz;
    s.validate();
    return s;
  }

  static PulseSegment free_evolution(double duration_us) {
    PulseSegment s;
    s.kind = SegmentKind::FreeEvolution;
    s.duration_us = duration_us;
    s.validate();
    return s;
  }

  void validate() const {
    if (!(duration_us >= 0.0)) throw ValidationError("pulse segment: duration must be >= 0");
    if (kind == SegmentKind::Drive && !(rabi_rad_per_us > 0.0))
      throw ValidationError("pulse segment: drive requires Rabi frequency > 0");
  }
};

enum class Transition { Omega1, Omega2 };

struct PulseSequence {
  std::vector<PulseSegment> segments;
  // Convention: omega1 is the lower-frequency transition, reached through the
  // |-1>-like sublevel for B > 0 along the symmetry axis.
  Transition target = Transition::Omega1;

  void validate() const {
    if (segments.empty()) throw ValidationError("pulse sequence: empty");
    for (const auto& s : segments) s.validate();
    // One microwave tone per sequence: a second tone would address a second
    // transition simultaneously, which is out of scope.
    bool have_delta = false;
    double delta = 0.0;
    for (const auto& s : segments) {
      if (s.kind != SegmentKind::Drive) continue;
      if (have_delta && s.detuning_mhz != delta)
        throw ValidationError(
            "pulse sequence: drive segments with different detunings address more than one "
            "transition at once; not supported");
      delta = s.detuning_mhz;
      have_delta = true;
    }
  }

  // Rotating-frame detuning of the (single) microwave tone; free-evolution
  // phase accumulates at this rate too.
  double frame_detuning_mhz() const {
    for (const auto& s : segments)
      if (s.kind == SegmentKind::Drive) return s.detuning_mhz;
    return 0.0;
  }

  // pi/2 - tau - pi/2
  static PulseSequence ramsey(double tau_us, double omega_r_rad_per_us, double delta_mhz) {
    const double t_half_pi = 0.5 * pi / omega_r_rad_per_us;
    PulseSequence seq;
    seq.segments = {PulseSegment::drive(t_half_pi, omega_r_rad_per_us, 0.0, delta_mhz),
                    PulseSegment::free_evolution(tau_us),
                    PulseSegment::drive(t_half_pi, omega_r_rad_per_us, 0.0, delta_mhz)};
    seq.validate();
    return seq;
  }

  // pi/2 - tau/2 - pi - tau/2 - pi/2, driven on resonance
  static PulseSequence hahn_echo(double tau_us, double omega_r_rad_per_us) {
    const double t_half_pi = 0.5 * pi / omega_r_rad_per_us;
    PulseSequence seq;
    seq.segments = {PulseSegment::drive(t_half_pi, omega_r_rad_per_us),
                    PulseSegment::free_evolution(0.5 * tau_us),
                    PulseSegment::drive(2.0 * t_half_pi, omega_r_rad_per_us),
                    PulseSegment::free_evolution(0.5 * tau_us),
                    PulseSegment::drive(t_half_pi, omega_r_rad_per_us)};
    seq.validate();
    return seq;
  }
};

struct NoiseChannels {
  double quasi_static_sigma_mhz = 0.0;
  double t1_us = std::numeric_limits<double>::infinity();
  double t2_pure_us = std::numeric_limits<double>::infinity();
  std::int64_t mc_shots = 1;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(quasi_static_sigma_mhz >= 0.0))
      throw ValidationError("noise channels: sigma must be >= 0");
    if (!(t1_us > 0.0)) throw ValidationError("noise channels: T1 must be > 0 (or infinity)");
    if (!(t2_pure_us > 0.0))
      throw ValidationError("noise channels: T2_pure must be > 0 (or infinity)");
    if (mc_shots < 1) throw ValidationError("noise channels: mc_shots must be >= 1");
  }

  // Quasi-static Gaussian detuning with sigma = 1/(sqrt(2) pi T2*) averages
  // cos(2 pi Delta tau) to cos(2 pi delta tau) exp(-(tau/T2*)^2).
  static double sigma_for_t2_star(double t2_star_us) {
    if (!(t2_star_us > 0.0)) throw ValidationError("T2* must be > 0");
    return 1.0 / (std::sqrt(2.0) * pi * t2_star_us);
  }
};

struct SpinState {
  Eigen::Matrix3cd rho;  // basis {|+1>, |0>, |-1>}

  static SpinState ground() {
    SpinState s;
    s.rho.setZero();
    s.rho(1, 1) = 1.0;  // optically polarized |0><0|
    return s;
  }

  double trace_error() const { return std::abs(rho.trace() - std::complex<double>(1.0)); }

  double hermiticity_error() const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(rho);
    return es.eigenvalues().minCoeff();
  }

  bool is_physical(double trace_tol = 1e-9, double herm_tol = 1e-10,
                   double eig_floor = -1e-10) const {
    return trace_error() < trace_tol && hermiticity_error() < herm_tol &&
           min_eigenvalue() > eig_floor;
  }
};

namespace detail {

// Density matrix of the driven two-level subspace; g = |0>, e = addressed
// sublevel. The spectator sublevel holds no population (initial state |0>).
struct Rho2 {
  std::complex<double> gg{1.0, 0.0};
  std::complex<double> ge{0.0, 0.0};
  std::complex<double> ee{0.0, 0.0};
};

// Exact rotation under H = ax sx + ay sy + az sz (rad/us), duration t.
inline void apply_unitary(Rho2& r, double ax, double ay, double az, double t_us) {
  using cd = std::complex<double>;
  const double w = std::sqrt(ax * ax + ay * ay + az * az);
  const double c = std::cos(w * t_us);
  const double s = (w > 0.0) ? std::sin(w * t_us) / w : t_us;  // sin(wt)/w -> t as w -> 0
  const cd u00(c, -s * az);
  const cd u01(-s * ay, -s * ax);
  const cd u10(s * ay, -s * ax);
  const cd u11(c, s * az);
  const cd eg = std::conj(r.ge);
  const cd n00 = u00 * (r.gg * std::conj(u00) + r.ge * std::conj(u01)) +
                 u01 * (eg * std::conj(u00) + r.ee * std::conj(u01));
  const cd n01 = u00 * (r.gg * std::conj(u10) + r.ge * std::conj(u11)) +
                 u01 * (eg * std::conj(u10) + r.ee * std::conj(u11));
  const cd n11 = u10 * (r.gg * std::conj(u10) + r.ge * std::conj(u11)) +
                 u11 * (eg * std::conj(u10) + r.ee * std::conj(u11));
  r.gg = n00;
  r.ge = n01;
  r.ee = n11;
}

// One segment at a frozen total detuning. Drives are exact generalized Rabi
// rotations; free evolution applies the frame phase, amplitude damping and
// pure dephasing as exact factors.
inline void apply_segment(Rho2& r, const PulseSegment& seg, double frame_detuning_mhz,
                          double frozen_detuning_mhz, double t1_us, double t2_pure_us) {
  if (seg.kind == SegmentKind::Drive) {
    const double delta_rad = 2.0 * pi * (seg.detuning_mhz + frozen_detuning_mhz);
    const double ax = 0.5 * seg.rabi_rad_per_us * std::cos(seg.phase_rad);
    const double ay = 0.5 * seg.rabi_rad_per_us * std::sin(seg.phase_rad);
    const double az = -0.5 * delta_rad;
    apply_unitary(r, ax, ay, az, seg.duration_us);
    return;
  }
  const double t = seg.duration_us;
  const double delta_rad = 2.0 * pi * (frame_detuning_mhz + frozen_detuning_mhz);
  const double p_decay = -std::expm1(-t / t1_us);
  r.gg += p_decay * r.ee;
  r.ee *= (1.0 - p_decay);
  const double damp = std::sqrt(1.0 - p_decay) * std::exp(-t / t2_pure_us);
  r.ge *= std::polar(damp, delta_rad * t);
}

inline int excited_index(Transition t) { return t == Transition::Omega1 ? 2 : 0; }

inline SpinState embed(const Rho2& r, Transition target) {
  SpinState s;
  s.rho.setZero();
  const int e = excited_index(target);
  s.rho(1, 1) = r.gg;
  s.rho(e, e) = r.ee;
  s.rho(1, e) = r.ge;
  s.rho(e, 1) = std::conj(r.ge);
  return s;
}

}  // namespace detail

// Observer invoked after each segment of a single shot; used to audit state
// validity mid-sequence.
using SegmentObserver = std::function<void(std::size_t segment_index, const SpinState&)>;

// Evolve one shot from |0><0| at a frozen detuning draw. T1/T2 channels come
// from `noise`; the Monte-Carlo fields (sigma, shots, seed) are ignored here.
inline SpinState propagate_shot(const PulseSequence& seq, const SpinSystemParams& spin,
                                const NoiseChannels& noise, double frozen_detuning_mhz,
                                const SegmentObserver& observer = {}) {
  seq.validate();
  noise.validate();
  (void)spin;  // transition frequencies are implicit in the rotating frame
  detail::Rho2 r;
  const double frame = seq.frame_detuning_mhz();
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    detail::apply_segment(r, seq.segments[i], frame, frozen_detuning_mhz, noise.t1_us,
                          noise.t2_pure_us);
    if (observer) observer(i, detail::embed(r, seq.target));
  }
  return detail::embed(r, seq.target);
}

namespace detail {

// Shot-averaged |0> population; `stream` isolates the random draws of
// different trace points. `coherence_scale` multiplies the two-level
// coherence just before the final segment (ESEEM injection hook).
inline double average_population(const PulseSequence& seq, const NoiseChannels& noise,
                                 std::uint64_t stream, double coherence_scale = 1.0) {
  const double frame = seq.frame_detuning_mhz();
  const std::size_t n_seg = seq.segments.size();
  rng::KahanSum acc;
  for (std::int64_t shot = 0; shot < noise.mc_shots; ++shot) {
    const double frozen =
        noise.quasi_static_sigma_mhz == 0.0
            ? 0.0
            : noise.quasi_static_sigma_mhz *
                  rng::gaussian(noise.rng_seed, stream, static_cast<std::uint64_t>(shot));
    Rho2 r;
    for (std::size_t i = 0; i < n_seg; ++i) {
      if (coherence_scale != 1.0 && i + 1 == n_seg) r.ge *= coherence_scale;
      apply_segment(r, seq.segments[i], frame, frozen, noise.t1_us, noise.t2_pure_us);
    }
    acc.add(r.gg.real());
  }
  return acc.sum / static_cast<double>(noise.mc_shots);
}

inline void check_grid(std::span<const double> xs, const char* what) {
  if (xs.empty()) throw ValidationError(std::string(what) + ": empty grid");
  if (!(xs.front() >= 0.0)) throw ValidationError(std::string(what) + ": grid must be >= 0");
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    if (!(xs[i] < xs[i + 1]))
      throw ValidationError(std::string(what) + ": grid not strictly increasing");
}

}  // namespace detail

// Shot-averaged population of |0> after the sequence.
inline double propagate(const PulseSequence& seq, const SpinSystemParams& spin,
                        const NoiseChannels& noise) {
  seq.validate();
  noise.validate();
  (void)spin;
  return detail::average_population(seq, noise, 0);
}

// pi/2 - tau - pi/2 versus tau. Expected shape: |0> population
// (1 - exp(-(tau/T2*)^2) cos(2 pi delta tau)) / 2 for sigma matched to T2*.
// Grids coarser than 1/(2 delta) alias the fringes (no error raised).
inline SignalTrace simulate_ramsey(std::span<const double> taus_us, const SpinSystemParams& spin,
                                   const NoiseChannels& noise, double delta_mhz,
                                   double omega_r_rad_per_us) {
  detail::check_grid(taus_us, "ramsey tau grid");
  noise.validate();
  SignalTrace trace;
  trace.x.assign(taus_us.begin(), taus_us.end());
  trace.y.reserve(taus_us.size());
  trace.x_unit = "us";
  trace.y_unit = "population";
  for (std::size_t k = 0; k < taus_us.size(); ++k) {
    const auto seq = PulseSequence::ramsey(taus_us[k], omega_r_rad_per_us, delta_mhz);
    (void)spin;
    trace.y.push_back(detail::average_population(seq, noise, static_cast<std::uint64_t>(k)));
  }
  return trace;
}

// pi/2 - tau/2 - pi - tau/2 - pi/2 versus total free-evolution time tau.
// Quasi-static detuning noise is refocused; the envelope decays with
// T2_pure. Optional ESEEM modulation multiplies the echo coherence by
// [1 - b sin^2(pi f1 tau)][1 - c sin^2(pi f2 tau)] before readout.
inline SignalTrace simulate_echo(std::span<const double> taus_us, const SpinSystemParams& spin,
                                 const NoiseChannels& noise, double omega_r_rad_per_us,
                                 const std::optional<EseemParams>& eseem = std::nullopt) {
  detail::check_grid(taus_us, "echo tau grid");
  noise.validate();
  SignalTrace trace;
  trace.x.assign(taus_us.begin(), taus_us.end());
  trace.y.reserve(taus_us.size());
  trace.x_unit = "us";
  trace.y_unit = "population";
  for (std::size_t k = 0; k < taus_us.size(); ++k) {
    const auto seq = PulseSequence::hahn_echo(taus_us[k], omega_r_rad_per_us);
    (void)spin;
    const double scale = eseem ? eseem->modulation(taus_us[k]) : 1.0;
    trace.y.push_back(
        detail::average_population(seq, noise, static_cast<std::uint64_t>(k), scale));
  }
  return trace;
}

// Continuous-wave ODMR spectrum: two Lorentzian dips at the transition
// frequencies, FWHM `linewidth_mhz`, signed depths `contrasts`.
inline SignalTrace simulate_odmr(std::span<const double> freqs_mhz, const SpinSystemParams& spin,
                                 double linewidth_mhz, std::pair<double, double> contrasts) {
  if (freqs_mhz.empty()) throw ValidationError("odmr frequency grid: empty");
  for (std::size_t i = 0; i + 1 < freqs_mhz.size(); ++i)
    if (!(freqs_mhz[i] < freqs_mhz[i + 1]))
      throw ValidationError("odmr frequency grid: not strictly increasing");
  if (!(linewidth_mhz > 0.0)) throw ValidationError("odmr: linewidth must be > 0");
  const auto [w1, w2] = transition_frequencies(spin);
  const std::vector<LorentzianPeak> peaks = {{w1, linewidth_mhz, contrasts.first},
                                             {w2, linewidth_mhz, contrasts.second}};
  SignalTrace trace;
  trace.x.assign(freqs_mhz.begin(), freqs_mhz.end());
  trace.y.reserve(freqs_mhz.size());
  trace.x_unit = "mhz";
  trace.y_unit = "delta_pl";
  for (double f : freqs_mhz) trace.y.push_back(lorentzian_spectrum(f, peaks, 0.0));
  return trace;
}

// Depolarization curve contrast*exp(-tau/T1) + offset, with optional additive
// Gaussian readout noise.
inline SignalTrace simulate_t1(std::span<const double> taus_us, double t1_us, double contrast,
                               double offset, double noise_sigma = 0.0,
                               std::uint64_t rng_seed = 0) {
  detail::check_grid(taus_us, "t1 tau grid");
  if (!(t1_us > 0.0)) throw ValidationError("simulate_t1: T1 must be > 0");
  if (!(noise_sigma >= 0.0)) throw ValidationError("simulate_t1: noise sigma must be >= 0");
  SignalTrace trace;
  trace.x.assign(taus_us.begin(), taus_us.end());
  trace.y.reserve(taus_us.size());
  trace.x_unit = "us";
  trace.y_unit = "delta_pl";
  constexpr std::uint64_t kReadoutStream = 0x7e00f00d;
  for (std::size_t i = 0; i < taus_us.size(); ++i) {
    double v = contrast * std::exp(-taus_us[i] / t1_us) + offset;
    if (noise_sigma > 0.0) v += noise_sigma * rng::gaussian(rng_seed, kReadoutStream, i);
    trace.y.push_back(v);
  }
  return trace;
}

}  // namespace sicspin
