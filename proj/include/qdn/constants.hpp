#ifndef QDN_CONSTANTS_HPP
#define QDN_CONSTANTS_HPP

namespace qdn::constants {

// CODATA 2018, SI units.
inline constexpr double planck_h = 6.62607015e-34;         // J s
inline constexpr double hbar = 1.054571817e-34;            // J s
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double electron_volt = 1.602176634e-19;   // J
inline constexpr double electron_mass = 9.1093837015e-31;  // kg

// Magnetic field to ordinary (cycles-per-second) frequency, ~13.996 GHz/T.
inline constexpr double bohr_magneton_hz_per_tesla = bohr_magneton / planck_h;

inline constexpr double hbar_ev_s = hbar / electron_volt;

}  // namespace qdn::constants

#endif
