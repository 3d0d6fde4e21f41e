#pragma once

namespace srlaser::constants {

// CODATA 2018. SI base units.
inline constexpr double hbar     = 1.054571817e-34;   // J s
inline constexpr double eps0     = 8.8541878128e-12;  // F m^-1
inline constexpr double e_charge = 1.602176634e-19;   // C
inline constexpr double bohr     = 5.29177210903e-11; // m
inline constexpr double c_light  = 299792458.0;       // m s^-1 (exact)

inline constexpr double pi = 3.141592653589793238462643383279502884;

// 87Sr 1S0 - 3P0 clock transition.
inline constexpr double default_wavelength = 698e-9;  // m
inline constexpr double default_omega_a =
    2.0 * pi * c_light / default_wavelength;          // rad s^-1

}  // namespace srlaser::constants
