#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "squidres/errors.hpp"
#include "squidres/fitting.hpp"
#include "squidres/lineshape.hpp"

namespace squidres {
namespace detail {

/// Shortest representation that parses back to the same double. Keeps the
/// files diffable and makes write/read a true identity, so downstream fits
/// see exactly the numbers that were computed.
inline std::string format_g(double x) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline double parse_double(std::string_view field, const std::string& file,
                           std::size_t line_no) {
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw CsvError(file + " line " + std::to_string(line_no) +
                   ": cannot parse number from '" + std::string(field) + "'");
  }
  return value;
}

/// Reads one line, strips a trailing CR, reports whether a line was read.
inline bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError(path + ": cannot open for writing");
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path + ": cannot open for reading");
  return in;
}

inline void expect_header(const std::string& got, std::string_view want,
                          const std::string& file) {
  if (got != want) {
    throw CsvError(file + " line 1: expected header '" + std::string(want) +
                   "', got '" + got + "'");
  }
}

}  // namespace detail

inline constexpr std::string_view kTraceHeader = "freq_hz,re_s21,im_s21";
inline constexpr std::string_view kFluxmapHeader =
    "phi_over_phi0,f0_hz,q_ext,q_inh,q_total,valid";
inline constexpr std::string_view kDatasetHeader2 = "phi_over_phi0,f0_hz";
inline constexpr std::string_view kDatasetHeader3 = "phi_over_phi0,f0_hz,q";

inline void write_trace_csv(std::ostream& out, const S21Trace& trace) {
  validate(trace);
  out << kTraceHeader << '\n';
  for (std::size_t i = 0; i < trace.freqs_hz.size(); ++i) {
    out << detail::format_g(trace.freqs_hz[i]) << ','
        << detail::format_g(trace.values[i].real()) << ','
        << detail::format_g(trace.values[i].imag()) << '\n';
  }
}

inline void write_trace_csv(const std::string& path, const S21Trace& trace) {
  auto out = detail::open_output(path);
  write_trace_csv(out, trace);
}

/// Reads the three-column trace format. Only the frequency grid and values
/// are recoverable from a CSV; sweep metadata lives in the JSON sidecar.
[[nodiscard]] inline S21Trace read_trace_csv(std::istream& in,
                                             const std::string& file) {
  std::string line;
  if (!detail::next_line(in, line)) throw CsvError(file + ": empty file");
  detail::expect_header(line, kTraceHeader, file);
  S21Trace trace;
  std::size_t line_no = 1;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 3) {
      throw CsvError(file + " line " + std::to_string(line_no) + ": expected 3 fields, got " +
                     std::to_string(fields.size()));
    }
    const double f = detail::parse_double(fields[0], file, line_no);
    const double re = detail::parse_double(fields[1], file, line_no);
    const double im = detail::parse_double(fields[2], file, line_no);
    if (!trace.freqs_hz.empty() && !(f > trace.freqs_hz.back())) {
      throw CsvError(file + " line " + std::to_string(line_no) +
                     ": freq_hz must be strictly increasing");
    }
    trace.freqs_hz.push_back(f);
    trace.values.emplace_back(re, im);
  }
  if (trace.freqs_hz.empty()) throw CsvError(file + ": no data rows");
  return trace;
}

[[nodiscard]] inline S21Trace read_trace_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_trace_csv(in, path);
}

inline void write_fluxmap_csv(std::ostream& out,
                              const std::vector<QCurvePoint>& curve) {
  out << kFluxmapHeader << '\n';
  for (const auto& pt : curve) {
    out << detail::format_g(pt.flux.value) << ',';
    if (pt.validity == Validity::ok) {
      out << detail::format_g(*pt.f0_hz) << ',' << detail::format_g(*pt.q_ext)
          << ',' << detail::format_g(*pt.q_inh) << ','
          << detail::format_g(*pt.q_total) << ",true\n";
    } else {
      out << ",,,,false\n";
    }
  }
}

inline void write_fluxmap_csv(const std::string& path,
                              const std::vector<QCurvePoint>& curve) {
  auto out = detail::open_output(path);
  write_fluxmap_csv(out, curve);
}

[[nodiscard]] inline std::vector<QCurvePoint> read_fluxmap_csv(
    std::istream& in, const std::string& file) {
  std::string line;
  if (!detail::next_line(in, line)) throw CsvError(file + ": empty file");
  detail::expect_header(line, kFluxmapHeader, file);
  std::vector<QCurvePoint> curve;
  std::size_t line_no = 1;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 6) {
      throw CsvError(file + " line " + std::to_string(line_no) + ": expected 6 fields, got " +
                     std::to_string(fields.size()));
    }
    QCurvePoint pt;
    pt.flux.value = detail::parse_double(fields[0], file, line_no);
    if (fields[5] == "true") {
      pt.validity = Validity::ok;
      pt.f0_hz = detail::parse_double(fields[1], file, line_no);
      pt.q_ext = detail::parse_double(fields[2], file, line_no);
      pt.q_inh = detail::parse_double(fields[3], file, line_no);
      pt.q_total = detail::parse_double(fields[4], file, line_no);
    } else if (fields[5] == "false") {
      pt.validity = Validity::near_half_quantum;
    } else {
      throw CsvError(file + " line " + std::to_string(line_no) +
                     ": valid must be 'true' or 'false'");
    }
    curve.push_back(pt);
  }
  return curve;
}

[[nodiscard]] inline std::vector<QCurvePoint> read_fluxmap_csv(
    const std::string& path) {
  auto in = detail::open_input(path);
  return read_fluxmap_csv(in, path);
}

inline void write_flux_dataset_csv(std::ostream& out, const FluxDataset& data) {
  bool any_q = false;
  for (const auto& pt : data.points) any_q |= pt.q.has_value();
  out << (any_q ? kDatasetHeader3 : kDatasetHeader2) << '\n';
  for (const auto& pt : data.points) {
    out << detail::format_g(pt.flux.value) << ','
        << detail::format_g(pt.f0_hz);
    if (any_q) {
      out << ',';
      if (pt.q) out << detail::format_g(*pt.q);
    }
    out << '\n';
  }
}

inline void write_flux_dataset_csv(const std::string& path,
                                   const FluxDataset& data) {
  auto out = detail::open_output(path);
  write_flux_dataset_csv(out, data);
}

/// Reads the two- or three-column tuning dataset; the q column may be empty
/// on any row.
[[nodiscard]] inline FluxDataset read_flux_dataset_csv(std::istream& in,
                                                       const std::string& file) {
  std::string line;
  if (!detail::next_line(in, line)) throw CsvError(file + ": empty file");
  bool has_q = false;
  if (line == kDatasetHeader3) {
    has_q = true;
  } else if (line != kDatasetHeader2) {
    throw CsvError(file + " line 1: expected header '" +
                   std::string(kDatasetHeader2) + "' or '" +
                   std::string(kDatasetHeader3) + "', got '" + line + "'");
  }
  FluxDataset data;
  std::size_t line_no = 1;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    const std::size_t want = has_q ? 3 : 2;
    if (fields.size() != want) {
      throw CsvError(file + " line " + std::to_string(line_no) + ": expected " +
                     std::to_string(want) + " fields, got " +
                     std::to_string(fields.size()));
    }
    FluxPoint pt;
    pt.flux.value = detail::parse_double(fields[0], file, line_no);
    pt.f0_hz = detail::parse_double(fields[1], file, line_no);
    if (has_q && !fields[2].empty()) {
      pt.q = detail::parse_double(fields[2], file, line_no);
    }
    data.points.push_back(pt);
  }
  if (data.points.empty()) throw CsvError(file + ": no data rows");
  return data;
}

[[nodiscard]] inline FluxDataset read_flux_dataset_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_flux_dataset_csv(in, path);
}

}  // namespace squidres
