#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "squidres/constants.hpp"
#include "squidres/fitting.hpp"
#include "squidres/lineshape.hpp"

namespace squidres {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a, the 64-bit variant. Cheap content fingerprint for manifests; not
/// cryptographic and not meant to be.
[[nodiscard]] inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[nodiscard]] inline std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

[[nodiscard]] inline std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for hashing");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return hex64(fnv1a64(bytes));
}

/// Everything needed to reproduce one CLI invocation byte for byte. No
/// timestamps on purpose: reruns must produce identical manifests.
struct RunManifest {
  std::string command;
  std::string config_hash;  // hex of the config bytes; empty when no config
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> args;
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, hash)
  std::vector<std::string> outputs;
};

[[nodiscard]] inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = m.config_hash;
  if (m.seed) j["seed"] = *m.seed;
  j["args"] = m.args;
  auto inputs = nlohmann::json::array();
  for (const auto& [path, hash] : m.inputs) {
    inputs.push_back({{"path", path}, {"fnv1a64", hash}});
  }
  j["inputs"] = inputs;
  j["outputs"] = m.outputs;
  return j;
}

[[nodiscard]] inline nlohmann::json trace_meta_json(const S21Trace& trace) {
  nlohmann::json j;
  j["f_start_hz"] = trace.spec.f_start_hz;
  j["f_stop_hz"] = trace.spec.f_stop_hz;
  j["n_points"] = trace.spec.n_points;
  j["flux_phi0"] = trace.spec.flux.value;
  j["temperature_k"] = trace.spec.env.temperature_k;
  j["p_in_w"] = trace.spec.p_in_w;
  j["seed"] = trace.seed;
  j["noise_sigma"] = trace.noise_sigma;
  j["normalized"] = trace.normalized;
  return j;
}

[[nodiscard]] inline nlohmann::json resonance_fit_json(const ResonanceFit& fit) {
  nlohmann::json j;
  j["f0_hz"] = fit.f0_hz;
  j["f0_stderr_hz"] = fit.f0_stderr_hz;
  j["q"] = fit.q;
  j["q_stderr"] = fit.q_stderr;
  j["scale_re"] = fit.scale.real();
  j["scale_im"] = fit.scale.imag();
  j["scale_re_stderr"] = fit.scale_re_stderr;
  j["scale_im_stderr"] = fit.scale_im_stderr;
  j["residual_norm"] = fit.residual_norm;
  j["n_iter"] = fit.n_iter;
  j["converged"] = fit.converged;
  return j;
}

[[nodiscard]] inline nlohmann::json flux_fit_json(const FluxCurveFit& fit) {
  nlohmann::json j;
  j["f_r_hz"] = fit.omega_r / (2.0 * constants::pi);
  j["f_r_stderr_hz"] = fit.omega_r_stderr / (2.0 * constants::pi);
  j["ic0_a"] = fit.ic0_a;
  j["ic0_stderr_a"] = fit.ic0_stderr_a;
  j["beta"] = fit.beta;
  j["beta_stderr"] = fit.beta_stderr;
  j["beta_free"] = fit.beta_free;
  j["residual_norm_hz"] = fit.residual_norm;
  j["n_iter"] = fit.n_iter;
  j["converged"] = fit.converged;
  return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
  write_json(path, manifest_json(m));
}

}  // namespace squidres
