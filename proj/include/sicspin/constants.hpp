#pragma once

namespace sicspin {

// Unit system used throughout: energies are expressed as ordinary (not
// angular) frequencies in MHz, times in microseconds, magnetic fields in
// tesla, temperatures in kelvin. All h / hbar factors are folded into the
// constants below at construction time, so no further unit conversion
// appears in the physics code.
struct PhysicalConstants {
  double bohr_magneton_mhz_per_t = 13996.2446;  // mu_B / h
  double boltzmann_mhz_per_k = 20836.6191;      // k_B / h
  double gyro_c13_mhz_per_t = 10.7084;          // 13C nuclear Larmor coefficient
  double gyro_si29_mhz_per_t = 8.4655;          // 29Si nuclear Larmor coefficient (magnitude)
};

inline constexpr PhysicalConstants constants{};

static_assert(constants.bohr_magneton_mhz_per_t > 0.0);
static_assert(constants.boltzmann_mhz_per_k > 0.0);
static_assert(constants.gyro_c13_mhz_per_t > 0.0);
static_assert(constants.gyro_si29_mhz_per_t > 0.0);

inline constexpr double pi = 3.14159265358979323846;

}  // namespace sicspin
