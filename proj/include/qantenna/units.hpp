#pragma once

#include <complex>
#include <numbers>

// Natural units: lengths in the transition wavelength lambda0, rates in the
// single-atom linewidth gamma_e, c = 1.
namespace qantenna {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kWavelength = 1.0;
inline constexpr double kWavenumber = 2.0 * kPi / kWavelength;
inline constexpr double kGammaE = 1.0;
// Resonant two-level cross-section 3 lambda0^2 / (2 pi).
inline constexpr double kCrossSection = 3.0 * kWavelength * kWavelength / (2.0 * kPi);

inline constexpr cplx kI{0.0, 1.0};

}  // namespace qantenna
