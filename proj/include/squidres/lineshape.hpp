#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "squidres/resonator.hpp"

namespace squidres {

/// One VNA-style frequency sweep: uniform grid, fixed flux, temperature and
/// drive power.
struct SweepSpec {
  double f_start_hz = 0.0;
  double f_stop_hz = 0.0;
  int n_points = 0;
  Flux flux;
  ThermalEnv env;
  double p_in_w = 0.0;
};

/// Additive circularly-symmetric complex noise, sigma per quadrature,
/// reproducible from the seed alone.
struct NoiseModel {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Complex transmission trace, linear units (not dB).
struct S21Trace {
  std::vector<double> freqs_hz;
  std::vector<std::complex<double>> values;
  SweepSpec spec;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  bool normalized = false;
};

inline void validate(const SweepSpec& spec) {
  if (!(spec.f_start_hz > 0.0) || !(spec.f_stop_hz > spec.f_start_hz)) {
    throw std::invalid_argument("SweepSpec: need 0 < f_start_hz < f_stop_hz");
  }
  if (spec.n_points < 2) {
    throw std::invalid_argument("SweepSpec: n_points must be >= 2");
  }
  if (spec.p_in_w < 0.0) {
    throw std::invalid_argument("SweepSpec: p_in_w must be >= 0");
  }
}

inline void validate(const S21Trace& trace) {
  if (trace.freqs_hz.empty()) {
    throw std::invalid_argument("S21Trace: empty trace");
  }
  if (trace.freqs_hz.size() != trace.values.size()) {
    throw std::invalid_argument("S21Trace: freqs and values differ in length");
  }
  for (std::size_t i = 1; i < trace.freqs_hz.size(); ++i) {
    if (!(trace.freqs_hz[i] > trace.freqs_hz[i - 1])) {
      throw std::invalid_argument("S21Trace: freqs_hz must be strictly increasing");
    }
  }
}

/// Transmission of the symmetric two-port resonator,
///   S21(omega) = (Q/Q_ext) / (1 + 2i Q (omega - omega_0)/omega_0),
/// with the loaded Q and flux-tuned omega_0 of the device.
[[nodiscard]] inline std::complex<double> s21_at(const DeviceModel& dev,
                                                 Flux flux, ThermalEnv env,
                                                 double omega) {
  const double w0 = resonance_frequency(dev, flux);
  const double q = total_q(dev, flux, env);
  const double qext = external_q(dev, flux);
  const std::complex<double> denom(1.0, 2.0 * q * (omega - w0) / w0);
  return (q / qext) / denom;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: output for a given (seed, counter) never depends on
/// evaluation order, so parallel sweeps stay bit-identical.
inline std::uint64_t noise_bits(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter));
}

inline double bits_to_unit(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;  // (0, 1]
}

/// One standard-normal pair via Box-Muller. Hand-rolled on purpose:
/// std::normal_distribution is not bit-stable across standard libraries.
inline std::complex<double> gaussian_pair(std::uint64_t seed,
                                          std::uint64_t counter) {
  const double u1 = bits_to_unit(noise_bits(seed, 2 * counter));
  const double u2 = bits_to_unit(noise_bits(seed, 2 * counter + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * constants::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace detail

/// Evaluate the model on the sweep grid and add per-point complex noise.
/// Identical (spec, noise) always reproduce the same trace bit for bit.
[[nodiscard]] inline S21Trace synth_sweep(const DeviceModel& dev,
                                          const SweepSpec& spec,
                                          const NoiseModel& noise = {}) {
  validate(spec);
  if (noise.sigma < 0.0) {
    throw std::invalid_argument("NoiseModel: sigma must be >= 0");
  }
  S21Trace trace;
  trace.spec = spec;
  trace.seed = noise.seed;
  trace.noise_sigma = noise.sigma;
  const int n = spec.n_points;
  trace.freqs_hz.reserve(n);
  trace.values.reserve(n);
  const double step = (spec.f_stop_hz - spec.f_start_hz) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double f = (i == n - 1) ? spec.f_stop_hz : spec.f_start_hz + i * step;
    std::complex<double> v =
        s21_at(dev, spec.flux, spec.env, 2.0 * constants::pi * f);
    if (noise.sigma > 0.0) {
      v += noise.sigma *
           detail::gaussian_pair(noise.seed, static_cast<std::uint64_t>(i));
    }
    trace.freqs_hz.push_back(f);
    trace.values.push_back(v);
  }
  return trace;
}

/// Divide by the maximum modulus, as measured traces are normalized to their
/// maximum. Idempotent.
[[nodiscard]] inline S21Trace normalize(const S21Trace& trace) {
  validate(trace);
  double peak = 0.0;
  for (const auto& v : trace.values) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) {
    throw std::invalid_argument("normalize: trace is identically zero");
  }
  S21Trace out = trace;
  for (auto& v : out.values) v /= peak;
  out.normalized = true;
  return out;
}

}  // namespace squidres
