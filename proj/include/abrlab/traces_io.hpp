#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "abrlab/domain.hpp"

namespace abrlab {

// Malformed file content. line() is 1-based, 0 when not line oriented.
class FormatError : public InvalidInput {
 public:
  FormatError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Shortest text that round-trips the double.
std::string format_number(double value);

// Capacity traces are CSV: an optional `time_s,capacity_kbps` header, then
// one `time,capacity` row per breakpoint. A `# duration_s=<seconds>` comment
// sets the trace length; without it the last row holds forever.
CapacityTrace parse_capacity_trace(std::string_view text);
CapacityTrace load_capacity_trace(const std::filesystem::path& path);
std::string format_capacity_trace(const CapacityTrace& trace);
void save_capacity_trace(const CapacityTrace& trace,
                         const std::filesystem::path& path);

// Manifests are JSON:
//   {"title_id": ..., "chunk_duration_s": ...,
//    "streams": [{"rate_kbps": ..., "chunk_sizes_kbit": [...]}, ...]}
VideoManifest parse_manifest(std::string_view json_text);
VideoManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const VideoManifest& manifest);
void save_manifest(const VideoManifest& manifest,
                   const std::filesystem::path& path);

// chunk[i][k] = V * R_i * m_k with one log-normal multiplier per chunk
// shared by all rates (mean 1, coefficient of variation `dispersion`),
// rescaled so each stream averages exactly V * R_i.
VideoManifest generate_vbr_manifest(std::span<const double> rates_kbps,
                                    std::size_t chunk_count,
                                    double chunk_duration_s, double dispersion,
                                    std::uint64_t seed);

// base -> 0 for outage_len_s -> base. Throws InvalidInput if the outage does
// not fit inside the trace.
CapacityTrace generate_outage_trace(double base_kbps, double outage_start_s,
                                    double outage_len_s, double duration_s);

struct PiecewiseTraceParams {
  double min_kbps = 235.0;
  double max_kbps = 6000.0;
  double mean_segment_s = 30.0;
  double duration_s = 1800.0;
  // Breakpoint times are rounded to multiples of this when positive.
  double time_quantum_s = 0.0;
};

// Exponential segment lengths, log-uniform capacities in [min, max].
CapacityTrace generate_piecewise_trace(const PiecewiseTraceParams& params,
                                       std::uint64_t seed);

}  // namespace abrlab
