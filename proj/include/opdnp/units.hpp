#pragma once

#include <numbers>

// Physical constants (CODATA 2018 exact or recommended values) and unit helpers.
namespace opdnp::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double planck = 6.62607015e-34;         // J s
inline constexpr double boltzmann = 1.380649e-23;        // J/K
inline constexpr double avogadro = 6.02214076e23;        // 1/mol
inline constexpr double gas_constant = 8.314462618;      // J/(mol K)
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double proton_gyro_hz_per_t = 42.577478518e6;
inline constexpr double hz_per_wavenumber = 29.9792458e9;  // 1 cm^-1 in Hz
inline constexpr double bohr_hz_per_t = bohr_magneton / planck;
// Point-dipole constant for two free electrons, Hz nm^3.
inline constexpr double electron_dipolar_hz_nm3 = 52.04e6;

inline constexpr double hz_to_wavenumber(double hz) { return hz / hz_per_wavenumber; }
inline constexpr double wavenumber_to_hz(double cm) { return cm * hz_per_wavenumber; }
inline constexpr double deg(double d) { return d * pi / 180.0; }

}  // namespace opdnp::units
