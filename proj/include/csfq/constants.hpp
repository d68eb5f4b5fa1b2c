#pragma once

#include <cmath>
#include <numbers>

namespace csfq {

// CODATA 2018 exact values (SI). Everything downstream works in
// "lab units": energies as ordinary frequencies in GHz (value = E/h),
// time in ns, phases in rad, currents in nA, temperatures in mK.
struct PhysicalConstants {
    static constexpr double electron_charge = 1.602176634e-19;  // C
    static constexpr double planck_h = 6.62607015e-34;          // J s
    static constexpr double boltzmann_kB = 1.380649e-23;        // J/K
    static constexpr double flux_quantum = planck_h / (2.0 * electron_charge);  // Wb, 2.067833848e-15
    static constexpr double hbar = planck_h / (2.0 * std::numbers::pi);
};

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Josephson energy of a junction with critical current I (nA), in GHz:
// E_J/h = I Phi0 / (2 pi h).
inline double josephson_energy_ghz(double critical_current_na) {
    return critical_current_na * 1e-9 * PhysicalConstants::flux_quantum /
           (two_pi * PhysicalConstants::planck_h) * 1e-9;
}

// e^2 / (C h) in GHz for a capacitance in fF. Kinetic prefactors in the
// circuit Hamiltonians are built from this (note e^2, not (2e)^2; the
// factor 4 from Cooper pairs is already folded into the model form).
inline double single_electron_charging_ghz(double capacitance_ff) {
    const double e = PhysicalConstants::electron_charge;
    return e * e / (capacitance_ff * 1e-15 * PhysicalConstants::planck_h) * 1e-9;
}

// hbar/(kB T) in ns for T in mK; the thermal exponent for an angular
// frequency w (rad/ns) is beta_ns(T) * w.
inline double thermal_beta_ns(double temperature_mk) {
    return PhysicalConstants::hbar / PhysicalConstants::boltzmann_kB /
           (temperature_mk * 1e-3) * 1e9;
}

// Flux unit conversions: phi = 2 pi Phi / Phi0.
inline constexpr double mphi0_to_rad(double mphi0) { return mphi0 * 1e-3 * two_pi; }
inline constexpr double rad_to_mphi0(double rad) { return rad / two_pi * 1e3; }

inline double ghz_to_angular(double f_ghz) { return two_pi * f_ghz; }  // rad/ns
inline double angular_to_ghz(double w) { return w / two_pi; }

}  // namespace csfq
