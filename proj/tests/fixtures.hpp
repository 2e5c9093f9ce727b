#pragma once

#include <cmath>

#include "squidres/resonator.hpp"
#include "test_util.hpp"

// Device descriptions matching the shipped sample configs.

inline squidres::DeviceModel make_sample_a() {
  squidres::DeviceModel dev;
  dev.bare = squidres::bare_from_impedance(1.805e9, 50.0);
  dev.coupling = {27e-15, 50.0};
  dev.n_squids = 1;
  dev.squid = squidres::SquidParams{330e-9, 40e-12};
  return dev;
}

inline squidres::DeviceModel make_sample_b() {
  squidres::DeviceModel dev;
  dev.bare = squidres::bare_from_impedance(1.85e9, 50.0);
  dev.coupling = {2e-15, 50.0};
  dev.n_squids = 7;
  dev.squid = squidres::SquidParams{2.2e-6, 20e-12};
  dev.q_int = 3e4;
  return dev;
}

inline squidres::DeviceModel make_test_resonator() {
  squidres::DeviceModel dev;
  dev.bare = squidres::bare_from_impedance(1.906e9, 50.0);
  dev.coupling = {2e-15, 50.0};
  dev.n_squids = 0;
  dev.q_int = 2e5;
  return dev;
}

// A random but physically sane SQUID-array device: coupling Q drawn
// log-uniform in [1e3, 1e5], beta in [0, 0.1], and the zero-flux
// participation kept small enough that the model stays valid out to
// |Phi/Phi0| = 0.45.
inline squidres::DeviceModel make_random_device(TestRng& rng) {
  namespace sc = squidres::constants;
  const double f_r = rng.uniform(1.5e9, 6.0e9);
  const double omega_r = 2.0 * sc::pi * f_r;
  const double z0 = 50.0, r0 = 50.0;
  const double q_target = std::pow(10.0, rng.uniform(3.0, 5.0));
  const double cc = std::sqrt(sc::pi / (4.0 * z0 * r0 * q_target * omega_r * omega_r));
  const int n = rng.unit() < 0.5 ? 1 : 7;
  const double beta = rng.uniform(0.0, 0.1);
  const double l_total = sc::pi * z0 / omega_r;
  const double eps_max = 0.8 * std::cos(0.45 * sc::pi) / n;
  const double eps0 = rng.uniform(0.005, eps_max);
  const double ic0 =
      sc::reduced_flux_quantum * (1.0 + 0.5 * beta) / (2.0 * l_total * eps0);
  squidres::DeviceModel dev;
  dev.bare = squidres::bare_from_impedance(f_r, z0);
  dev.coupling = {cc, r0};
  dev.n_squids = n;
  dev.squid = squidres::SquidParams{ic0, beta * sc::reduced_flux_quantum / ic0};
  return dev;
}
