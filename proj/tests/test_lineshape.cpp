#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "squidres/lineshape.hpp"
#include "test_util.hpp"

using namespace squidres;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const ThermalEnv kCold{0.060};

DeviceModel make_plain() {  // N = 0, no internal loss: peak transmission 1
  DeviceModel dev;
  dev.bare = bare_from_impedance(1.906e9, 50.0);
  dev.coupling = {2e-15, 50.0};
  dev.n_squids = 0;
  return dev;
}

SweepSpec around_resonance(const DeviceModel& dev, Flux flux, ThermalEnv env,
                           int n_points, double halfwidths = 5.0) {
  const double f0 = resonance_frequency(dev, flux) / (2.0 * constants::pi);
  const double q = total_q(dev, flux, env);
  SweepSpec spec;
  spec.f_start_hz = f0 * (1.0 - halfwidths / q);
  spec.f_stop_hz = f0 * (1.0 + halfwidths / q);
  spec.n_points = n_points;
  spec.flux = flux;
  spec.env = env;
  return spec;
}

}  // namespace

TEST_CASE("s21 on resonance is real and bounded by one") {
  const DeviceModel a = make_sample_a();
  const double w0 = resonance_frequency(a, Flux{0.0});
  const std::complex<double> peak = s21_at(a, Flux{0.0}, kCold, w0);
  CHECK(peak.imag() == 0.0);
  CHECK(peak.real() > 0.0);
  CHECK(peak.real() <= 1.0);
  CHECK_THAT(peak.real(),
             WithinRel(total_q(a, Flux{0.0}, kCold) / external_q(a, Flux{0.0}),
                       1e-14));

  const DeviceModel plain = make_plain();
  const double w0p = resonance_frequency(plain, Flux{0.0});
  CHECK_THAT(std::abs(s21_at(plain, Flux{0.0}, ThermalEnv{0.0}, w0p)),
             WithinRel(1.0, 1e-14));
}

TEST_CASE("s21 half-bandwidth point") {
  const DeviceModel a = make_sample_a();
  const double w0 = resonance_frequency(a, Flux{0.0});
  const double q = total_q(a, Flux{0.0}, kCold);
  const double peak = std::abs(s21_at(a, Flux{0.0}, kCold, w0));

  const std::complex<double> v = s21_at(a, Flux{0.0}, kCold, w0 * (1.0 + 0.5 / q));
  CHECK_THAT(std::abs(v), WithinRel(peak / std::sqrt(2.0), 1e-9));
  CHECK_THAT(std::arg(v), WithinRel(-constants::pi / 4.0, 1e-9));
}

TEST_CASE("s21 far from resonance is small") {
  const DeviceModel a = make_sample_a();
  const double w0 = resonance_frequency(a, Flux{0.0});
  const double q = total_q(a, Flux{0.0}, kCold);
  const double peak = std::abs(s21_at(a, Flux{0.0}, kCold, w0));
  CHECK(std::abs(s21_at(a, Flux{0.0}, kCold, w0 * (1.0 + 100.0 / q))) <=
        peak / 100.0);
}

TEST_CASE("lineshape magnitude is symmetric about resonance") {
  const DeviceModel a = make_sample_a();
  const double w0 = resonance_frequency(a, Flux{0.0});
  TestRng rng(244);
  for (int k = 0; k < 200; ++k) {
    const double delta = w0 * std::pow(10.0, rng.uniform(-6.0, -3.0));
    const double up = std::abs(s21_at(a, Flux{0.0}, kCold, w0 + delta));
    const double dn = std::abs(s21_at(a, Flux{0.0}, kCold, w0 - delta));
    CHECK_THAT(up, WithinRel(dn, 1e-9));
  }
}

TEST_CASE("phase crosses zero at resonance and winds monotonically") {
  const DeviceModel a = make_sample_a();
  const double w0 = resonance_frequency(a, Flux{0.0});
  CHECK(std::arg(s21_at(a, Flux{0.0}, kCold, w0)) == 0.0);

  const SweepSpec spec = around_resonance(a, Flux{0.0}, kCold, 801);
  const S21Trace trace = synth_sweep(a, spec);
  double prev = std::arg(trace.values.front());
  CHECK(prev < constants::pi / 2.0);
  for (std::size_t i = 1; i < trace.values.size(); ++i) {
    const double phase = std::arg(trace.values[i]);
    CHECK(phase < prev);
    prev = phase;
  }
  CHECK(prev > -constants::pi / 2.0);
}

TEST_CASE("3 dB bandwidth matches f0 over Q") {
  const DeviceModel a = make_sample_a();
  for (double flux : {0.0, 0.3}) {
    const double w0 = resonance_frequency(a, Flux{flux});
    const double q = total_q(a, Flux{flux}, kCold);
    const double peak = std::abs(s21_at(a, Flux{flux}, kCold, w0));
    const double level = peak / std::sqrt(2.0);

    // Bisect between a point inside the band (above the level) and one
    // outside; works on either flank.
    auto bisect = [&](double inside, double outside) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (std::abs(s21_at(a, Flux{flux}, kCold, mid)) > level) {
          inside = mid;
        } else {
          outside = mid;
        }
      }
      return 0.5 * (inside + outside);
    };
    const double right = bisect(w0, w0 * (1.0 + 10.0 / q));
    const double left = bisect(w0, w0 * (1.0 - 10.0 / q));
    const double width = right - left;
    CHECK_THAT(width, WithinRel(w0 / q, 1e-3));
  }
}

TEST_CASE("noiseless synthesis equals pointwise evaluation") {
  const DeviceModel a = make_sample_a();
  const SweepSpec spec = around_resonance(a, Flux{0.0}, kCold, 257);
  const S21Trace trace = synth_sweep(a, spec);
  REQUIRE(trace.freqs_hz.size() == 257);
  CHECK(trace.freqs_hz.front() == spec.f_start_hz);
  CHECK(trace.freqs_hz.back() == spec.f_stop_hz);
  for (std::size_t i = 0; i < trace.freqs_hz.size(); ++i) {
    const auto direct = s21_at(a, Flux{0.0}, kCold,
                               2.0 * constants::pi * trace.freqs_hz[i]);
    CHECK(trace.values[i] == direct);
  }
}

TEST_CASE("noise is deterministic in the seed") {
  const DeviceModel a = make_sample_a();
  const SweepSpec spec = around_resonance(a, Flux{0.0}, kCold, 401);
  const S21Trace t1 = synth_sweep(a, spec, NoiseModel{0.01, 42});
  const S21Trace t2 = synth_sweep(a, spec, NoiseModel{0.01, 42});
  REQUIRE(t1.values.size() == t2.values.size());
  for (std::size_t i = 0; i < t1.values.size(); ++i) {
    CHECK(t1.values[i] == t2.values[i]);
    CHECK(t1.freqs_hz[i] == t2.freqs_hz[i]);
  }

  const S21Trace t3 = synth_sweep(a, spec, NoiseModel{0.01, 43});
  bool any_diff = false;
  for (std::size_t i = 0; i < t1.values.size(); ++i) {
    any_diff |= t1.values[i] != t3.values[i];
  }
  CHECK(any_diff);
}

TEST_CASE("noise statistics match the requested sigma") {
  const DeviceModel a = make_sample_a();
  SweepSpec spec = around_resonance(a, Flux{0.0}, kCold, 4001);
  const double sigma = 0.02;
  const S21Trace noisy = synth_sweep(a, spec, NoiseModel{sigma, 7});
  const S21Trace clean = synth_sweep(a, spec);

  double sum = 0.0, sum2 = 0.0;
  const std::size_t n = noisy.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = noisy.values[i] - clean.values[i];
    sum += d.real() + d.imag();
    sum2 += d.real() * d.real() + d.imag() * d.imag();
  }
  const double mean = sum / (2.0 * n);
  const double rms = std::sqrt(sum2 / (2.0 * n));
  CHECK_THAT(mean, WithinAbs(0.0, 5.0 * sigma / std::sqrt(2.0 * n)));
  CHECK_THAT(rms, WithinRel(sigma, 0.05));
}

TEST_CASE("sweep validation") {
  const DeviceModel a = make_sample_a();
  SweepSpec bad = around_resonance(a, Flux{0.0}, kCold, 100);
  std::swap(bad.f_start_hz, bad.f_stop_hz);
  CHECK_THROWS_AS(synth_sweep(a, bad), std::invalid_argument);

  SweepSpec one = around_resonance(a, Flux{0.0}, kCold, 1);
  CHECK_THROWS_AS(synth_sweep(a, one), std::invalid_argument);

  SweepSpec ok = around_resonance(a, Flux{0.0}, kCold, 64);
  CHECK_THROWS_AS(synth_sweep(a, ok, NoiseModel{-0.1, 0}), std::invalid_argument);
}

TEST_CASE("normalize") {
  const DeviceModel a = make_sample_a();
  const SweepSpec spec = around_resonance(a, Flux{0.0}, kCold, 301);
  const S21Trace trace = synth_sweep(a, spec, NoiseModel{0.003, 5});

  const S21Trace unit = normalize(trace);
  CHECK(unit.normalized);
  double peak = 0.0;
  for (const auto& v : unit.values) peak = std::max(peak, std::abs(v));
  CHECK_THAT(peak, WithinAbs(1.0, 1e-14));

  // Idempotence.
  const S21Trace twice = normalize(unit);
  for (std::size_t i = 0; i < unit.values.size(); ++i) {
    CHECK_THAT(std::abs(twice.values[i] - unit.values[i]), WithinAbs(0.0, 1e-15));
  }

  // Scaling by an exact power of two changes nothing after normalization.
  S21Trace half = trace;
  for (auto& v : half.values) v *= 0.5;
  const S21Trace renorm = normalize(half);
  for (std::size_t i = 0; i < unit.values.size(); ++i) {
    CHECK(renorm.values[i] == unit.values[i]);
  }

  S21Trace empty;
  CHECK_THROWS_AS(normalize(empty), std::invalid_argument);
}

TEST_CASE("trace validation rejects disordered grids") {
  S21Trace t;
  t.freqs_hz = {1e9, 2e9, 2e9};
  t.values = {{1, 0}, {1, 0}, {1, 0}};
  CHECK_THROWS_AS(validate(t), std::invalid_argument);
  t.freqs_hz = {1e9, 2e9};
  CHECK_THROWS_AS(validate(t), std::invalid_argument);  // length mismatch
}

TEST_CASE("peak transmission never exceeds unity") {
  TestRng rng(255);
  for (int k = 0; k < 100; ++k) {
    DeviceModel dev;
    dev.bare = bare_from_impedance(rng.uniform(1e9, 6e9), 50.0);
    dev.coupling = {rng.uniform(1e-15, 30e-15), 50.0};
    dev.n_squids = 1;
    const double ic0 = rng.uniform(0.5e-6, 4e-6);
    dev.squid = SquidParams{ic0, 0.0};
    if (rng.uniform_int(0, 1)) dev.q_int = rng.uniform(1e4, 1e6);
    const Flux flux{rng.uniform(-0.4, 0.4)};
    if (flux_validity(dev, flux) != Validity::ok) continue;
    const ThermalEnv env{rng.uniform(0.0, 0.3)};
    const double w0 = resonance_frequency(dev, flux);
    CHECK(std::abs(s21_at(dev, flux, env, w0)) <= 1.0 + 1e-12);
  }
}
