// Command-line front end: simulate sweeps and flux maps, fit traces and
// tuning curves. Exit codes: 0 ok, 2 input error, 3 model validity error,
// 4 fit failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "squidres/config.hpp"
#include "squidres/fitting.hpp"
#include "squidres/lineshape.hpp"
#include "squidres/serialize.hpp"
#include "squidres/trace_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitModel = 3;
constexpr int kExitFit = 4;

struct SimulateArgs {
  std::string config;
  double flux = 0.0;
  std::optional<double> f_start_hz;
  std::optional<double> f_stop_hz;
  int points = 1601;
  double power_dbm = -140.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct FluxmapArgs {
  std::string config;
  double flux_start = -0.5;
  double flux_stop = 0.5;
  int flux_points = 101;
  std::string out;
};

struct FitTraceArgs {
  std::string trace;
  std::string out;
};

struct FitFluxArgs {
  std::string dataset;
  std::string config;
  bool free_beta = false;
  std::string out;
};

std::string strip_csv_suffix(const std::string& path) {
  constexpr std::string_view suffix = ".csv";
  if (path.size() > suffix.size() &&
      path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return path.substr(0, path.size() - suffix.size());
  }
  return path;
}

std::string strip_json_suffix(const std::string& path) {
  constexpr std::string_view suffix = ".json";
  if (path.size() > suffix.size() &&
      path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return path.substr(0, path.size() - suffix.size());
  }
  return path;
}

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

void print_warnings(const squidres::DeviceModel& dev) {
  for (const auto& w : squidres::model_warnings(dev)) {
    std::cerr << "warning: " << w << '\n';
  }
}

int cmd_simulate(const SimulateArgs& args) {
  const std::string config_path = squidres::resolve_config_path(args.config);
  const auto cfg = squidres::load_device_config(config_path);
  print_warnings(cfg.dev);

  squidres::SweepSpec spec;
  spec.flux = squidres::Flux{args.flux};
  spec.env = cfg.env;
  spec.p_in_w = dbm_to_watts(args.power_dbm);
  spec.n_points = args.points;
  if (args.f_start_hz) {
    spec.f_start_hz = *args.f_start_hz;
    spec.f_stop_hz = *args.f_stop_hz;
  } else {
    // Auto window: five linewidths either side of the resonance.
    const double f0 =
        squidres::resonance_frequency(cfg.dev, spec.flux) / (2.0 * squidres::constants::pi);
    const double q = squidres::total_q(cfg.dev, spec.flux, spec.env);
    spec.f_start_hz = f0 * (1.0 - 5.0 / q);
    spec.f_stop_hz = f0 * (1.0 + 5.0 / q);
  }

  const squidres::NoiseModel noise{args.noise_sigma, args.seed};
  const squidres::S21Trace trace = squidres::synth_sweep(cfg.dev, spec, noise);

  const std::string base = strip_csv_suffix(args.out);
  const std::string meta_path = base + ".meta.json";
  const std::string manifest_path = base + ".manifest.json";
  squidres::write_trace_csv(args.out, trace);
  squidres::write_json(meta_path, squidres::trace_meta_json(trace));

  squidres::RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_hash = squidres::file_hash_hex(config_path);
  manifest.seed = args.seed;
  manifest.args = {
      {"flux", squidres::detail::format_g(args.flux)},
      {"fstart", squidres::detail::format_g(spec.f_start_hz)},
      {"fstop", squidres::detail::format_g(spec.f_stop_hz)},
      {"points", std::to_string(args.points)},
      {"power_dbm", squidres::detail::format_g(args.power_dbm)},
      {"noise_sigma", squidres::detail::format_g(args.noise_sigma)},
      {"out", args.out},
  };
  manifest.inputs = {{config_path, squidres::file_hash_hex(config_path)}};
  manifest.outputs = {args.out, meta_path};
  squidres::write_manifest(manifest_path, manifest);
  return kExitOk;
}

int cmd_fluxmap(const FluxmapArgs& args) {
  const std::string config_path = squidres::resolve_config_path(args.config);
  const auto cfg = squidres::load_device_config(config_path);
  print_warnings(cfg.dev);
  if (!(args.flux_start < args.flux_stop)) {
    throw std::invalid_argument("--flux-start must be below --flux-stop");
  }

  std::vector<squidres::Flux> fluxes;
  fluxes.reserve(args.flux_points);
  const double step =
      (args.flux_stop - args.flux_start) / (args.flux_points - 1);
  for (int i = 0; i < args.flux_points; ++i) {
    const double phi =
        (i == args.flux_points - 1) ? args.flux_stop : args.flux_start + i * step;
    fluxes.push_back(squidres::Flux{phi});
  }
  const auto curve = squidres::model_q_curve(cfg.dev, cfg.env, fluxes);
  squidres::write_fluxmap_csv(args.out, curve);

  squidres::RunManifest manifest;
  manifest.command = "fluxmap";
  manifest.config_hash = squidres::file_hash_hex(config_path);
  manifest.args = {
      {"flux_start", squidres::detail::format_g(args.flux_start)},
      {"flux_stop", squidres::detail::format_g(args.flux_stop)},
      {"flux_points", std::to_string(args.flux_points)},
      {"out", args.out},
  };
  manifest.inputs = {{config_path, squidres::file_hash_hex(config_path)}};
  manifest.outputs = {args.out};
  squidres::write_manifest(strip_csv_suffix(args.out) + ".manifest.json", manifest);
  return kExitOk;
}

int cmd_fit_trace(const FitTraceArgs& args) {
  const squidres::S21Trace trace = squidres::read_trace_csv(args.trace);
  const squidres::ResonanceFit fit = squidres::fit_resonance(trace);

  squidres::write_json(args.out, squidres::resonance_fit_json(fit));
  squidres::RunManifest manifest;
  manifest.command = "fit-trace";
  manifest.args = {{"trace", args.trace}, {"out", args.out}};
  manifest.inputs = {{args.trace, squidres::file_hash_hex(args.trace)}};
  manifest.outputs = {args.out};
  squidres::write_manifest(strip_json_suffix(args.out) + ".manifest.json", manifest);

  if (!fit.converged) {
    std::cerr << "error: trace fit did not converge (best f0 = "
              << squidres::detail::format_g(fit.f0_hz * 1e-9)
              << " GHz, Q = " << squidres::detail::format_g(fit.q)
              << ", residual = " << squidres::detail::format_g(fit.residual_norm)
              << ")\n";
    return kExitFit;
  }
  std::printf("f0_ghz=%.12g\n", fit.f0_hz * 1e-9);
  std::printf("q=%.12g\n", fit.q);
  return kExitOk;
}

int cmd_fit_flux(const FitFluxArgs& args) {
  const squidres::FluxDataset data = squidres::read_flux_dataset_csv(args.dataset);
  const std::string config_path = squidres::resolve_config_path(args.config);
  const auto cfg = squidres::load_device_config(config_path);
  print_warnings(cfg.dev);

  const squidres::FluxCurveFit fit =
      squidres::fit_flux_curve(data, cfg.dev, args.free_beta);

  squidres::write_json(args.out, squidres::flux_fit_json(fit));
  squidres::RunManifest manifest;
  manifest.command = "fit-flux";
  manifest.config_hash = squidres::file_hash_hex(config_path);
  manifest.args = {
      {"dataset", args.dataset},
      {"free_beta", args.free_beta ? "true" : "false"},
      {"out", args.out},
  };
  manifest.inputs = {{args.dataset, squidres::file_hash_hex(args.dataset)},
                     {config_path, squidres::file_hash_hex(config_path)}};
  manifest.outputs = {args.out};
  squidres::write_manifest(strip_json_suffix(args.out) + ".manifest.json", manifest);

  if (!fit.converged) {
    std::cerr << "error: flux-curve fit did not converge (best Ic0 = "
              << squidres::detail::format_g(fit.ic0_a * 1e9)
              << " nA, residual = " << squidres::detail::format_g(fit.residual_norm)
              << " Hz)\n";
    return kExitFit;
  }
  std::printf("f_r_ghz=%.12g\n", fit.omega_r / (2.0 * squidres::constants::pi) * 1e-9);
  std::printf("ic0_na=%.12g\n", fit.ic0_a * 1e9);
  if (args.free_beta) std::printf("beta=%.12g\n", fit.beta);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flux-tunable SQUID-array resonator simulator and fitter"};
  app.set_version_flag("--version", squidres::kToolVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "synthesize a complex S21 sweep");
  simulate->add_option("config", sim.config, "device config JSON")->required();
  simulate->add_option("--flux", sim.flux, "applied flux, Phi0 units")
      ->capture_default_str();
  auto* fstart = simulate->add_option("--fstart", sim.f_start_hz, "sweep start, Hz");
  auto* fstop = simulate->add_option("--fstop", sim.f_stop_hz, "sweep stop, Hz");
  fstart->needs(fstop);
  fstop->needs(fstart);
  simulate->add_option("--points", sim.points, "points in the sweep")
      ->check(CLI::Range(2, 10000000))
      ->capture_default_str();
  simulate->add_option("--power-dbm", sim.power_dbm, "drive power, dBm")
      ->capture_default_str();
  simulate->add_option("--noise-sigma", sim.noise_sigma, "additive noise per quadrature")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "noise seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "output trace CSV")->required();

  FluxmapArgs map;
  auto* fluxmap = app.add_subcommand("fluxmap", "tabulate f0 and the Q budget vs flux");
  fluxmap->add_option("config", map.config, "device config JSON")->required();
  fluxmap->add_option("--flux-start", map.flux_start, "first flux, Phi0 units")
      ->capture_default_str();
  fluxmap->add_option("--flux-stop", map.flux_stop, "last flux, Phi0 units")
      ->capture_default_str();
  fluxmap->add_option("--flux-points", map.flux_points, "rows in the map")
      ->check(CLI::Range(2, 10000000))
      ->capture_default_str();
  fluxmap->add_option("--out", map.out, "output CSV")->required();

  FitTraceArgs ftr;
  auto* fit_trace = app.add_subcommand("fit-trace", "fit f0, Q and scale to a trace CSV");
  fit_trace->add_option("trace", ftr.trace, "input trace CSV")->required();
  fit_trace->add_option("--out", ftr.out, "output fit report JSON")->required();

  FitFluxArgs ffl;
  auto* fit_flux = app.add_subcommand("fit-flux", "fit omega_r and Ic0 to a tuning dataset");
  fit_flux->add_option("dataset", ffl.dataset, "input dataset CSV")->required();
  fit_flux->add_option("config", ffl.config, "prior device config JSON")->required();
  fit_flux->add_flag("--free-beta", ffl.free_beta, "fit beta instead of freezing the prior");
  fit_flux->add_option("--out", ffl.out, "output fit report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (fluxmap->parsed()) return cmd_fluxmap(map);
    if (fit_trace->parsed()) return cmd_fit_trace(ftr);
    return cmd_fit_flux(ffl);
  } catch (const squidres::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const squidres::CsvError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const squidres::ModelError& e) {
    std::cerr << "error (--flux): " << e.what() << '\n';
    return kExitModel;
  } catch (const squidres::FitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
