#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "sicspin/dynamics.hpp"
#include "sicspin/fit_models.hpp"

using namespace sicspin;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return out;
}

// Dense-timestep RK4 integration of the driven two-level Schroedinger
// equation in the rotating frame: i psi' = H psi,
// H = [[-Delta/2, Omega/2], [Omega/2, Delta/2]] (rad/us). Independent of the
// exact-rotation route used by the simulator. Integrates interval by
// interval so the sample instants are hit exactly.
std::vector<double> rk4_populations(double omega, double delta_rad,
                                    const std::vector<double>& sample_times) {
  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  const auto deriv = [&](const std::array<cd, 2>& psi) {
    return std::array<cd, 2>{-i * (-0.5 * delta_rad * psi[0] + 0.5 * omega * psi[1]),
                             -i * (0.5 * omega * psi[0] + 0.5 * delta_rad * psi[1])};
  };
  std::array<cd, 2> psi{1.0, 0.0};
  std::vector<double> out;
  double t_prev = 0.0;
  for (double t_sample : sample_times) {
    const int n_sub = 400;
    const double dt = (t_sample - t_prev) / n_sub;
    for (int s = 0; s < n_sub && dt > 0.0; ++s) {
      const auto k1 = deriv(psi);
      const std::array<cd, 2> p2{psi[0] + 0.5 * dt * k1[0], psi[1] + 0.5 * dt * k1[1]};
      const auto k2 = deriv(p2);
      const std::array<cd, 2> p3{psi[0] + 0.5 * dt * k2[0], psi[1] + 0.5 * dt * k2[1]};
      const auto k3 = deriv(p3);
      const std::array<cd, 2> p4{psi[0] + dt * k3[0], psi[1] + dt * k3[1]};
      const auto k4 = deriv(p4);
      for (int j = 0; j < 2; ++j)
        psi[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    out.push_back(std::norm(psi[0]));
    t_prev = t_sample;
  }
  return out;
}

const SpinSystemParams kSpin(1365.0, 0.0, 2.0, 0.018);

}  // namespace

TEST_CASE("resonant pi pulse empties |0> exactly") {
  const double omega = 50.0;
  PulseSequence seq;
  seq.segments = {PulseSegment::drive(pi / omega, omega)};
  NoiseChannels quiet;
  CHECK(propagate(seq, kSpin, quiet) < 1e-9);
}

TEST_CASE("two back-to-back pi/2 pulses compose to a pi pulse") {
  const double omega = 50.0;
  PulseSequence seq;
  seq.segments = {PulseSegment::drive(0.5 * pi / omega, omega),
                  PulseSegment::drive(0.5 * pi / omega, omega)};
  NoiseChannels quiet;
  CHECK(propagate(seq, kSpin, quiet) < 1e-9);
}

TEST_CASE("detuned drive oscillates at the generalized Rabi frequency") {
  const double omega = 30.0;           // rad/us
  const double delta_mhz = 3.0;        // MHz
  const double delta_rad = 2.0 * pi * delta_mhz;
  const double w_expected = std::hypot(omega, delta_rad);

  const auto times = linspace(0.0, 3.0 * 2.0 * pi / w_expected, 401);
  NoiseChannels quiet;

  std::vector<double> populations;
  for (double t : times) {
    PulseSequence seq;
    seq.segments = {PulseSegment::drive(t, omega, 0.0, delta_mhz)};
    populations.push_back(propagate(seq, kSpin, quiet));
  }

  SECTION("pointwise agreement with dense RK4 integration") {
    const auto oracle = rk4_populations(omega, delta_rad, times);
    REQUIRE(oracle.size() == populations.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i)
      worst = std::max(worst, std::abs(oracle[i] - populations[i]));
    CHECK(worst < 1e-8);
  }

  SECTION("oscillation frequency within 0.1%") {
    // first minimum of P0 sits at t = pi / W
    std::size_t i_min = 0;
    for (std::size_t i = 0; i < populations.size(); ++i)
      if (times[i] < 1.5 * pi / w_expected && populations[i] < populations[i_min]) i_min = i;
    REQUIRE(i_min > 0);
    REQUIRE(i_min + 1 < populations.size());
    // parabolic refinement around the sampled minimum
    const double pm = populations[i_min - 1], p0 = populations[i_min], pp = populations[i_min + 1];
    const double dt = times[1] - times[0];
    const double t_min = times[i_min] + 0.5 * dt * (pm - pp) / (pm - 2 * p0 + pp);
    const double w_measured = pi / t_min;
    CHECK(w_measured == Approx(w_expected).epsilon(1e-3));
  }
}

TEST_CASE("state stays physical after every segment") {
  const double omega = 80.0;
  auto seq = PulseSequence::ramsey(1.3, omega, 10.0);
  NoiseChannels noise;
  noise.t1_us = 50.0;
  noise.t2_pure_us = 30.0;
  for (double frozen : {-0.41, 0.0, 0.27}) {
    std::size_t segments_seen = 0;
    const SegmentObserver observer = [&](std::size_t, const SpinState& state) {
      ++segments_seen;
      REQUIRE(state.trace_error() < 1e-9);
      REQUIRE(state.hermiticity_error() < 1e-10);
      REQUIRE(state.min_eigenvalue() > -1e-10);
    };
    const SpinState final_state = propagate_shot(seq, kSpin, noise, frozen, observer);
    CHECK(segments_seen == seq.segments.size());
    CHECK(final_state.is_physical());
    CHECK(final_state.rho(0, 0) == std::complex<double>(0.0));  // spectator |+1> untouched
  }
}

TEST_CASE("echo sequence addresses the chosen transition sublevel") {
  const double omega = 50.0;
  PulseSequence seq;
  seq.segments = {PulseSegment::drive(pi / omega, omega)};
  NoiseChannels quiet;
  seq.target = Transition::Omega1;
  CHECK(std::abs(propagate_shot(seq, kSpin, quiet, 0.0).rho(2, 2) - 1.0) < 1e-9);
  seq.target = Transition::Omega2;
  CHECK(std::abs(propagate_shot(seq, kSpin, quiet, 0.0).rho(0, 0) - 1.0) < 1e-9);
}

TEST_CASE("identical seeds reproduce bit-identical traces") {
  const auto taus = linspace(0.0, 2.0, 41);
  NoiseChannels noise;
  noise.quasi_static_sigma_mhz = NoiseChannels::sigma_for_t2_star(1.0);
  noise.mc_shots = 500;
  noise.rng_seed = 1234;
  const auto a = simulate_ramsey(taus, kSpin, noise, 10.0, 1e5);
  const auto b = simulate_ramsey(taus, kSpin, noise, 10.0, 1e5);
  REQUIRE(a.y == b.y);
  noise.rng_seed = 4321;
  const auto c = simulate_ramsey(taus, kSpin, noise, 10.0, 1e5);
  CHECK(a.y != c.y);
}

TEST_CASE("noise-free Ramsey shows undamped fringes at the detuning frequency") {
  NoiseChannels quiet;  // sigma = 0, single shot: deterministic
  const auto taus = linspace(0.0, 1.0, 101);
  const auto trace = simulate_ramsey(taus, kSpin, quiet, 10.0, 1e5);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double expected = 0.5 * (1.0 - std::cos(2.0 * pi * 10.0 * taus[i]));
    REQUIRE(trace.y[i] == Approx(expected).margin(5e-3));  // finite-pulse systematics only
  }
}

TEST_CASE("Monte-Carlo Ramsey envelope converges to the Gaussian") {
  // with delta = 0 the |0> population is (1 - E[cos(2 pi Delta tau)])/2, so
  // 1 - 2 y estimates the envelope exp(-2 pi^2 sigma^2 tau^2)
  const double sigma = NoiseChannels::sigma_for_t2_star(1.0);
  NoiseChannels noise;
  noise.quasi_static_sigma_mhz = sigma;
  noise.mc_shots = 20000;
  noise.rng_seed = 7;
  const auto taus = linspace(0.0, 2.0, 21);
  const auto trace = simulate_ramsey(taus, kSpin, noise, 0.0, 1e5);
  const double bound = 3.0 / std::sqrt(static_cast<double>(noise.mc_shots));
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double envelope = std::exp(-2.0 * pi * pi * sigma * sigma * taus[i] * taus[i]);
    REQUIRE(std::abs((1.0 - 2.0 * trace.y[i]) - envelope) < bound);
  }
}

TEST_CASE("echo refocuses quasi-static detuning noise") {
  NoiseChannels noise;
  noise.quasi_static_sigma_mhz = 1.0;  // strong dephasing
  noise.mc_shots = 2000;
  noise.rng_seed = 99;
  const auto taus = linspace(0.5, 10.0, 20);
  const auto trace = simulate_echo(taus, kSpin, noise, 1e5);
  const double bound = 3.0 / std::sqrt(static_cast<double>(noise.mc_shots));
  for (double y : trace.y) REQUIRE(std::abs(y - 1.0) < bound);
}

TEST_CASE("echo envelope decays with T2_pure") {
  NoiseChannels noise;
  noise.quasi_static_sigma_mhz = 0.3;
  noise.t2_pure_us = 30.7;
  noise.mc_shots = 400;
  noise.rng_seed = 5;
  const auto taus = linspace(2.0, 60.0, 30);
  const auto trace = simulate_echo(taus, kSpin, noise, 1e4);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double amplitude = 2.0 * trace.y[i] - 1.0;
    const double expected = std::exp(-taus[i] / 30.7);
    REQUIRE(std::abs(amplitude - expected) / expected < 0.01);
  }
}

TEST_CASE("echo with ESEEM modulation matches the closed form") {
  const EseemParams mod(1.0, 30.7, 0.8, 0.6, 0.1927512, 0.1523790, 0.0);
  NoiseChannels noise;
  noise.t2_pure_us = 30.7;
  const auto taus = linspace(0.0, 90.0, 181);
  const auto trace = simulate_echo(taus, kSpin, noise, 1e5, mod);
  // population = (1 + m(tau) exp(-tau/T2))/2, i.e. the standard closed form
  // with a = 0.5, d = 0.5
  const EseemParams closed(0.5, 30.7, 0.8, 0.6, 0.1927512, 0.1523790, 0.5);
  double worst = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i)
    worst = std::max(worst, std::abs(trace.y[i] - eseem_signal(taus[i], closed)));
  CHECK(worst < 0.01);
  CHECK(worst < 1e-4);  // noiseless run is essentially exact
}

TEST_CASE("ODMR simulation places dips at the transition frequencies") {
  const auto freqs = linspace(700.0, 2000.0, 2601);
  const auto trace = simulate_odmr(freqs, kSpin, 8.0, {-1.0, -0.8});
  const auto [w1, w2] = transition_frequencies(kSpin);
  std::size_t i_min = 0;
  for (std::size_t i = 0; i < trace.y.size(); ++i)
    if (trace.y[i] < trace.y[i_min]) i_min = i;
  CHECK(std::abs(trace.x[i_min] - w1) <= 0.5);  // grid spacing

  SECTION("lorentzian2 refit recovers centers within linewidth/100") {
    const FitModel& model = fit_model("lorentzian2");
    FitProblem problem;
    problem.model = &model;
    problem.initial_guess = initial_guess(model, trace);
    const FitResult res = fit(problem, trace);
    REQUIRE(res.converged);
    const double c1 = std::min(res.parameters[1], res.parameters[4]);
    const double c2 = std::max(res.parameters[1], res.parameters[4]);
    CHECK(std::abs(c1 - w1) < 0.08);
    CHECK(std::abs(c2 - w2) < 0.08);
    CHECK(zfs_from_resonances(c1, c2) == Approx(kSpin.d_zfs_mhz).margin(0.01));
  }
}

TEST_CASE("T1 simulation matches the closed form and refits") {
  const auto taus = linspace(0.0, 2000.0, 100);
  SECTION("noiseless curve is exact") {
    const auto trace = simulate_t1(taus, 567.0, 1.0, 0.1);
    for (std::size_t i = 0; i < taus.size(); ++i)
      REQUIRE(trace.y[i] == Approx(std::exp(-taus[i] / 567.0) + 0.1).margin(1e-14));
  }
  SECTION("1% readout noise still recovers T1 within 5%") {
    const auto trace = simulate_t1(taus, 567.0, 1.0, 0.1, 0.01, 42);
    const FitModel& model = fit_model("t1");
    FitProblem problem;
    problem.model = &model;
    problem.initial_guess = initial_guess(model, trace);
    const FitResult res = fit(problem, trace);
    REQUIRE(res.converged);
    CHECK(res.parameters[1] == Approx(567.0).epsilon(0.05));
  }
}

TEST_CASE("coarse tau grids alias the fringes without an error") {
  NoiseChannels quiet;
  const auto taus = linspace(0.0, 2.0, 11);  // 0.2 us spacing > 1/(2*10 MHz)
  CHECK_NOTHROW(simulate_ramsey(taus, kSpin, quiet, 10.0, 1e4));
}

TEST_CASE("sequence and noise validation") {
  NoiseChannels quiet;
  SECTION("empty sequence") {
    PulseSequence seq;
    CHECK_THROWS_AS(propagate(seq, kSpin, quiet), ValidationError);
  }
  SECTION("drive needs a positive Rabi frequency") {
    CHECK_THROWS_AS(PulseSegment::drive(1.0, 0.0), ValidationError);
  }
  SECTION("negative durations are rejected") {
    CHECK_THROWS_AS(PulseSegment::free_evolution(-1.0), ValidationError);
  }
  SECTION("two microwave tones in one sequence are rejected") {
    PulseSequence seq;
    seq.segments = {PulseSegment::drive(0.1, 10.0, 0.0, 5.0),
                    PulseSegment::drive(0.1, 10.0, 0.0, -5.0)};
    CHECK_THROWS_AS(propagate(seq, kSpin, quiet), ValidationError);
  }
  SECTION("noise channel invariants") {
    NoiseChannels bad;
    bad.mc_shots = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = NoiseChannels{};
    bad.quasi_static_sigma_mhz = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = NoiseChannels{};
    bad.t1_us = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(NoiseChannels::sigma_for_t2_star(0.0), ValidationError);
  }
  SECTION("grids must be increasing and nonnegative") {
    const std::vector<double> bad = {0.0, 0.5, 0.5};
    CHECK_THROWS_AS(simulate_ramsey(bad, kSpin, quiet, 10.0, 100.0), ValidationError);
    const std::vector<double> neg = {-0.5, 0.5};
    CHECK_THROWS_AS(simulate_echo(neg, kSpin, quiet, 100.0), ValidationError);
  }
}

TEST_CASE("T2* to sigma mapping") {
  CHECK(NoiseChannels::sigma_for_t2_star(1.0) ==
        Approx(0.22507907903927651).epsilon(1e-14));
}
