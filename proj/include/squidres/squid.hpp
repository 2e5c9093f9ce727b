#pragma once

#include <cmath>
#include <string>

#include "squidres/constants.hpp"
#include "squidres/errors.hpp"

namespace squidres {

/// Applied magnetic flux through one SQUID loop, in units of the flux
/// quantum Phi0. All SQUID properties are periodic in value with period 1
/// and even in value.
struct Flux {
  double value = 0.0;

  /// Equivalent flux folded into [-0.5, 0.5], the principal branch of the
  /// inductance expansion.
  [[nodiscard]] Flux reduced() const { return Flux{value - std::round(value)}; }
};

/// Frustration f = pi * Phi / Phi0, radians. No range reduction.
[[nodiscard]] inline double frustration(Flux flux) {
  return constants::pi * flux.value;
}

/// One DC SQUID: two nominally identical junctions of critical current ic0_a
/// in a loop of self-inductance ll_h.
struct SquidParams {
  double ic0_a = 0.0;  // single-junction critical current, A
  double ll_h = 0.0;   // loop self-inductance, H

  /// Loop-inductance parameter beta = Ll * Ic0 / phi0. Derived, never stored.
  /// The linear-inductance formula is a first-order expansion in beta.
  [[nodiscard]] double beta() const {
    return ll_h * ic0_a / constants::reduced_flux_quantum;
  }
};

/// Evaluation is rejected when |cos f| falls at or below this cutoff:
/// the expansion diverges in the close vicinity of half-integer flux.
inline constexpr double kCosFrustrationCutoff = 1e-3;

/// Loose validity guard for the first-order-in-beta expansion; crossing it
/// produces a warning, not an error.
inline constexpr double kBetaWarnThreshold = 0.2;

namespace detail {

inline void check_squid(const SquidParams& sq) {
  if (!(sq.ic0_a > 0.0)) {
    throw std::invalid_argument("SquidParams: ic0_a must be > 0");
  }
  if (sq.ll_h < 0.0) {
    throw std::invalid_argument("SquidParams: ll_h must be >= 0");
  }
}

/// cos of the reduced frustration, checked against the half-quantum cutoff.
inline double checked_cos_frustration(Flux flux) {
  const double f = frustration(flux.reduced());
  const double c = std::cos(f);  // f in [-pi/2, pi/2] so c >= 0
  if (std::abs(c) <= kCosFrustrationCutoff) {
    throw FluxTooCloseToHalfQuantum(
        "flux " + std::to_string(flux.value) +
        " Phi0 is within the half-flux-quantum cutoff (|cos f| <= 1e-3); "
        "the SQUID inductance model diverges there");
  }
  return c;
}

}  // namespace detail

/// Effective critical current Ic(Phi) = 2 Ic0 |cos f| of the SQUID at zero
/// loop inductance. Zero at half-integer flux; downstream operations must
/// handle that themselves.
[[nodiscard]] inline double effective_critical_current(const SquidParams& sq,
                                                       Flux flux) {
  detail::check_squid(sq);
  const double f = frustration(flux.reduced());
  return 2.0 * sq.ic0_a * std::abs(std::cos(f));
}

/// Linear part of the SQUID inductance,
///   L_J0(Phi) = (phi0 / Ic(Phi)) * (1 + beta * cos 2f / (2 cos f)),
/// first order in beta, valid on the branch f in ]-pi/2, pi/2[ after range
/// reduction. Throws FluxTooCloseToHalfQuantum when the expansion diverges
/// (cutoff on |cos f|, or the first-order correction driving L_J0
/// nonpositive, which happens before the cutoff once beta > 0).
[[nodiscard]] inline double squid_linear_inductance(const SquidParams& sq,
                                                    Flux flux) {
  detail::check_squid(sq);
  const double c = detail::checked_cos_frustration(flux);
  const double f = frustration(flux.reduced());
  const double ic = 2.0 * sq.ic0_a * c;
  const double lj0 = constants::reduced_flux_quantum / ic *
                     (1.0 + sq.beta() * std::cos(2.0 * f) / (2.0 * c));
  if (!(lj0 > 0.0)) {
    throw FluxTooCloseToHalfQuantum(
        "flux " + std::to_string(flux.value) +
        " Phi0: first-order SQUID inductance is nonpositive; the expansion "
        "in beta is invalid this close to a half flux quantum");
  }
  return lj0;
}

/// Nonlinear coefficient A(Phi) = phi0 / (2 Ic(Phi)^3), H/A^2, the i^2 term
/// of the current expansion of the SQUID inductance.
[[nodiscard]] inline double squid_nonlinear_coeff(const SquidParams& sq,
                                                  Flux flux) {
  detail::check_squid(sq);
  const double c = detail::checked_cos_frustration(flux);
  const double ic = 2.0 * sq.ic0_a * c;
  return constants::reduced_flux_quantum / (2.0 * ic * ic * ic);
}

/// Full current-dependent inductance L_J(Phi, i) = L_J0(Phi) + A(Phi) i^2.
/// Requires |i| < Ic(Phi) for the expansion to make sense.
[[nodiscard]] inline double squid_total_inductance(const SquidParams& sq,
                                                   Flux flux,
                                                   double current_a) {
  const double ic = effective_critical_current(sq, flux);
  if (std::abs(current_a) >= ic) {
    throw CurrentExceedsCritical(
        "current " + std::to_string(current_a * 1e9) +
        " nA is at or above the effective critical current " +
        std::to_string(ic * 1e9) + " nA");
  }
  return squid_linear_inductance(sq, flux) +
         squid_nonlinear_coeff(sq, flux) * current_a * current_a;
}

}  // namespace squidres
