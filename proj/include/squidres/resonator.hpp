#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "squidres/constants.hpp"
#include "squidres/errors.hpp"
#include "squidres/squid.hpp"

namespace squidres {

/// Half-wave transmission-line resonator without SQUIDs, first mode only.
/// omega_r, z0_ohm, l_h and c_f are redundant by construction; validate()
/// enforces the two defining relations. Per-unit-length values and the
/// physical length are optional metadata.
struct BareResonator {
  double omega_r = 0.0;  // angular frequency of the bare fundamental, rad/s
  double z0_ohm = 0.0;   // characteristic impedance
  double l_h = 0.0;      // total line inductance
  double c_f = 0.0;      // total line capacitance
  std::optional<double> length_m;
  std::optional<double> ind_per_len_h_m;
  std::optional<double> cap_per_len_f_m;
};

/// Input and output coupling capacitors, assumed identical, feeding lines of
/// impedance r0_ohm.
struct CouplingSpec {
  double cc_f = 0.0;
  double r0_ohm = 50.0;
};

struct ThermalEnv {
  double temperature_k = 0.0;
};

/// Complete device: bare resonator, coupling ports, and an array of
/// n_squids identical DC SQUIDs in series at the current antinode.
/// q_int models internal losses when known; absent means lossless dielectric.
struct DeviceModel {
  BareResonator bare;
  CouplingSpec coupling;
  int n_squids = 0;
  std::optional<SquidParams> squid;
  std::optional<double> q_int;
};

/// Expansion-validity classification of a flux point. Invalid points are
/// flagged, never returned as numbers.
enum class Validity { ok, near_half_quantum, epsilon_large };

inline void validate(const BareResonator& bare) {
  if (!(bare.omega_r > 0.0) || !(bare.z0_ohm > 0.0) || !(bare.l_h > 0.0) ||
      !(bare.c_f > 0.0)) {
    throw std::invalid_argument("BareResonator: omega_r, z0_ohm, l_h, c_f must all be > 0");
  }
  const double w = constants::pi / std::sqrt(bare.l_h * bare.c_f);
  if (std::abs(w - bare.omega_r) > 1e-12 * bare.omega_r) {
    throw std::invalid_argument("BareResonator: omega_r != pi/sqrt(L C)");
  }
  const double z = std::sqrt(bare.l_h / bare.c_f);
  if (std::abs(z - bare.z0_ohm) > 1e-12 * bare.z0_ohm) {
    throw std::invalid_argument("BareResonator: z0_ohm != sqrt(L/C)");
  }
  if (bare.length_m && bare.ind_per_len_h_m &&
      std::abs(*bare.ind_per_len_h_m * *bare.length_m - bare.l_h) > 1e-12 * bare.l_h) {
    throw std::invalid_argument("BareResonator: l_h != ind_per_len * length");
  }
  if (bare.length_m && bare.cap_per_len_f_m &&
      std::abs(*bare.cap_per_len_f_m * *bare.length_m - bare.c_f) > 1e-12 * bare.c_f) {
    throw std::invalid_argument("BareResonator: c_f != cap_per_len * length");
  }
}

inline void validate(const DeviceModel& dev) {
  validate(dev.bare);
  if (!(dev.coupling.cc_f > 0.0)) {
    throw std::invalid_argument("CouplingSpec: cc_f must be > 0");
  }
  if (!(dev.coupling.r0_ohm > 0.0)) {
    throw std::invalid_argument("CouplingSpec: r0_ohm must be > 0");
  }
  if (dev.n_squids < 0) {
    throw std::invalid_argument("DeviceModel: n_squids must be >= 0");
  }
  if (dev.n_squids > 0) {
    if (!dev.squid) {
      throw std::invalid_argument("DeviceModel: n_squids > 0 requires squid parameters");
    }
    detail::check_squid(*dev.squid);
  }
  if (dev.q_int && !(*dev.q_int > 0.0)) {
    throw std::invalid_argument("DeviceModel: q_int must be > 0 when given");
  }
}

/// Construct the bare resonator from its two observables. Inverts
/// omega_r = pi/sqrt(L C) and Z0 = sqrt(L/C):
///   L = pi Z0 / omega_r, C = pi / (Z0 omega_r).
[[nodiscard]] inline BareResonator bare_from_impedance(double f_r_hz,
                                                       double z0_ohm) {
  if (!(f_r_hz > 0.0) || !(z0_ohm > 0.0)) {
    throw std::invalid_argument("bare_from_impedance: f_r_hz and z0_ohm must be > 0");
  }
  BareResonator bare;
  bare.omega_r = 2.0 * constants::pi * f_r_hz;
  bare.z0_ohm = z0_ohm;
  bare.l_h = constants::pi * z0_ohm / bare.omega_r;
  bare.c_f = constants::pi / (z0_ohm * bare.omega_r);
  return bare;
}

/// Non-fatal model caveats, e.g. a loop-inductance parameter large enough
/// that the first-order expansion is doubtful.
[[nodiscard]] inline std::vector<std::string> model_warnings(const DeviceModel& dev) {
  std::vector<std::string> warnings;
  if (dev.n_squids > 0 && dev.squid) {
    const double beta = dev.squid->beta();
    if (beta >= kBetaWarnThreshold) {
      warnings.push_back("beta = " + std::to_string(beta) +
                         " >= 0.2: first-order treatment of the loop "
                         "inductance is questionable");
    }
  }
  return warnings;
}

/// Coupling quality factor Qc = pi / (4 Z0 R0 Cc^2 omega_r^2) of the two
/// identical ports. Flux independent.
[[nodiscard]] inline double coupling_q(const DeviceModel& dev) {
  validate(dev);
  const double cc = dev.coupling.cc_f;
  const double w = dev.bare.omega_r;
  return constants::pi /
         (4.0 * dev.bare.z0_ohm * dev.coupling.r0_ohm * cc * cc * w * w);
}

/// Participation ratio of one SQUID, epsilon(Phi) = L_J0(Phi) / L. Zero for
/// a device without SQUIDs. Throws EpsilonOutOfRange when the SQUID
/// inductance reaches the line inductance; nothing is linear there anymore.
[[nodiscard]] inline double participation(const DeviceModel& dev, Flux flux) {
  validate(dev);
  if (dev.n_squids == 0) return 0.0;
  const double eps = squid_linear_inductance(*dev.squid, flux) / dev.bare.l_h;
  if (eps >= 1.0) {
    throw EpsilonOutOfRange("participation ratio " + std::to_string(eps) +
                            " at flux " + std::to_string(flux.value) +
                            " Phi0 is >= 1");
  }
  return eps;
}

/// Loaded resonance omega_0(Phi) = omega_r / (1 + N epsilon(Phi)), rad/s.
[[nodiscard]] inline double resonance_frequency(const DeviceModel& dev, Flux flux) {
  return dev.bare.omega_r / (1.0 + dev.n_squids * participation(dev, flux));
}

/// External quality factor Q_ext(Phi) = Qc [1 + 4 N epsilon(Phi)]: the SQUID
/// array slows the mode down and decouples it from the ports.
[[nodiscard]] inline double external_q(const DeviceModel& dev, Flux flux) {
  return coupling_q(dev) * (1.0 + 4.0 * dev.n_squids * participation(dev, flux));
}

/// Kerr-type coefficient K(Phi) >= 0 such that the stored energy E pulls the
/// resonance by delta omega_0 / omega_0 = -K E:
///   K = N {2 omega_0 / (pi R0 [1 + 2 N eps])}^2 phi0 / (8 Ic^3),
/// units 1/J. Zero without SQUIDs.
[[nodiscard]] inline double duffing_coefficient(const DeviceModel& dev, Flux flux) {
  const double eps = participation(dev, flux);
  if (dev.n_squids == 0) return 0.0;
  const double w0 = dev.bare.omega_r / (1.0 + dev.n_squids * eps);
  const double amp = 2.0 * w0 /
                     (constants::pi * dev.coupling.r0_ohm *
                      (1.0 + 2.0 * dev.n_squids * eps));
  const double ic = effective_critical_current(*dev.squid, flux);
  return dev.n_squids * amp * amp * constants::reduced_flux_quantum /
         (8.0 * ic * ic * ic);
}

/// Relative Duffing shift delta omega_0 / omega_0 = -K(Phi) E for stored
/// energy E. Always <= 0: the SQUID potential softens.
[[nodiscard]] inline double duffing_shift(const DeviceModel& dev, Flux flux,
                                          double energy_j) {
  if (energy_j < 0.0) {
    throw std::invalid_argument("duffing_shift: energy must be >= 0");
  }
  return -duffing_coefficient(dev, flux) * energy_j;
}

/// Bose-Einstein occupation of a mode at omega0. Zero at T = 0.
[[nodiscard]] inline double thermal_occupation(double omega0, ThermalEnv env) {
  if (!(omega0 > 0.0)) {
    throw std::invalid_argument("thermal_occupation: omega0 must be > 0");
  }
  if (env.temperature_k < 0.0) {
    throw std::invalid_argument("thermal_occupation: temperature must be >= 0");
  }
  if (env.temperature_k == 0.0) return 0.0;
  const double x = constants::hbar * omega0 /
                   (constants::boltzmann * env.temperature_k);
  return 1.0 / std::expm1(x);
}

/// RMS thermal energy fluctuation sqrt(Ebar^2 + hbar omega0 Ebar) with
/// Ebar = hbar omega0 nbar; equivalently hbar omega0 sqrt(nbar (nbar + 1)).
[[nodiscard]] inline double energy_fluctuation(double omega0, ThermalEnv env) {
  const double quantum = constants::hbar * omega0;
  const double ebar = quantum * thermal_occupation(omega0, env);
  return std::sqrt(ebar * (ebar + quantum));
}

/// Inverse inhomogeneous quality factor K(Phi) * deltaE: quasi-static
/// smearing of the resonance by thermal energy fluctuations.
[[nodiscard]] inline double inverse_inhomogeneous_q(const DeviceModel& dev,
                                                    Flux flux, ThermalEnv env) {
  const double coeff = duffing_coefficient(dev, flux);
  if (coeff == 0.0) return 0.0;
  const double w0 = resonance_frequency(dev, flux);
  return coeff * energy_fluctuation(w0, env);
}

/// Q_inh(Phi, T); infinite (no broadening) at T = 0 or without SQUIDs.
[[nodiscard]] inline double inhomogeneous_q(const DeviceModel& dev, Flux flux,
                                            ThermalEnv env) {
  const double inv = inverse_inhomogeneous_q(dev, flux, env);
  if (inv == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / inv;
}

/// Total quality factor: 1/Q = 1/Q_ext + 1/Q_inh + 1/Q_int, the internal
/// term only when configured.
[[nodiscard]] inline double total_q(const DeviceModel& dev, Flux flux,
                                    ThermalEnv env) {
  double inv = 1.0 / external_q(dev, flux) + inverse_inhomogeneous_q(dev, flux, env);
  if (dev.q_int) inv += 1.0 / *dev.q_int;
  return 1.0 / inv;
}

/// Mean intracavity photon number for on-resonance drive power p_in_w into
/// the symmetric two-port device: E = P Q / omega_0, nbar = E / (hbar omega_0).
/// q_override substitutes a measured Q for the modeled one.
[[nodiscard]] inline double photons_from_input_power(
    double p_in_w, const DeviceModel& dev, Flux flux, ThermalEnv env,
    std::optional<double> q_override = {}) {
  if (p_in_w < 0.0) {
    throw std::invalid_argument("photons_from_input_power: power must be >= 0");
  }
  const double w0 = resonance_frequency(dev, flux);
  const double q = q_override ? *q_override : total_q(dev, flux, env);
  const double energy = p_in_w * q / w0;
  return energy / (constants::hbar * w0);
}

/// No-throw classification of a flux point for sweep code: expansion
/// failures become flags instead of exceptions.
[[nodiscard]] inline Validity flux_validity(const DeviceModel& dev, Flux flux) {
  if (dev.n_squids == 0) return Validity::ok;
  try {
    (void)participation(dev, flux);
  } catch (const FluxTooCloseToHalfQuantum&) {
    return Validity::near_half_quantum;
  } catch (const EpsilonOutOfRange&) {
    return Validity::epsilon_large;
  }
  return Validity::ok;
}

}  // namespace squidres
