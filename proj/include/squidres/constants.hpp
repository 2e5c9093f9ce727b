#pragma once

#include <numbers>

namespace squidres::constants {

// CODATA 2018 values, SI units throughout.
inline constexpr double flux_quantum = 2.067833848e-15;  // Phi0 = h/2e, Wb
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double boltzmann = 1.380649e-23;        // J/K

// Reduced flux quantum phi0 = Phi0 / 2 pi, Wb.
inline constexpr double reduced_flux_quantum =
    flux_quantum / (2.0 * std::numbers::pi);

inline constexpr double pi = std::numbers::pi;

}  // namespace squidres::constants
