#include "abrlab/traces_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace abrlab {

namespace {

constexpr std::string_view kTraceHeader = "time_s,capacity_kbps";
constexpr std::string_view kDurationKey = "duration_s=";
constexpr int kManifestFormatVersion = 1;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::string with_line(std::size_t line, const std::string& what) {
  return line ? "line " + std::to_string(line) + ": " + what : what;
}

}  // namespace

FormatError::FormatError(const std::string& what, std::size_t line)
    : InvalidInput(with_line(line, what)), line_(line) {}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

CapacityTrace parse_capacity_trace(std::string_view text) {
  std::vector<CapacityPoint> points;
  double duration = std::numeric_limits<double>::infinity();
  bool seen_first_line = false;
  std::size_t line_no = 0;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      if (body.starts_with(kDurationKey)) {
        auto d = parse_double(body.substr(kDurationKey.size()));
        if (!d || !(*d > 0.0)) throw FormatError("bad duration_s", line_no);
        duration = *d;
      }
      continue;
    }
    const bool first = !seen_first_line;
    seen_first_line = true;
    if (first && line == kTraceHeader) continue;

    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError("expected `time_s,capacity_kbps`", line_no);
    }
    auto t = parse_double(line.substr(0, comma));
    auto c = parse_double(line.substr(comma + 1));
    if (!t || !c) throw FormatError("expected two numbers", line_no);
    if (points.empty() && *t != 0.0) {
      throw FormatError("first breakpoint must be at time 0", line_no);
    }
    if (!points.empty() && !(*t > points.back().time_s)) {
      throw FormatError("breakpoint times must be strictly increasing",
                        line_no);
    }
    if (!(*c >= 0.0)) throw FormatError("negative capacity", line_no);
    points.push_back({*t, *c});
  }
  if (points.empty()) throw FormatError("trace has no breakpoints");
  if (!(duration > points.back().time_s)) {
    throw FormatError("duration_s must exceed the last breakpoint time");
  }
  return CapacityTrace{std::move(points), duration};
}

CapacityTrace load_capacity_trace(const std::filesystem::path& path) {
  return parse_capacity_trace(read_text_file(path));
}

std::string format_capacity_trace(const CapacityTrace& trace) {
  std::string out;
  if (std::isfinite(trace.duration_s)) {
    out += "# duration_s=" + format_number(trace.duration_s) + "\n";
  }
  out += kTraceHeader;
  out += '\n';
  for (const auto& p : trace.breakpoints) {
    out += format_number(p.time_s) + "," + format_number(p.capacity_kbps) + "\n";
  }
  return out;
}

void save_capacity_trace(const CapacityTrace& trace,
                         const std::filesystem::path& path) {
  write_text_file(path, format_capacity_trace(trace));
}

VideoManifest parse_manifest(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }

  VideoManifest m;
  try {
    if (doc.contains("format_version") &&
        doc.at("format_version").get<int>() != kManifestFormatVersion) {
      throw FormatError("unsupported manifest format_version");
    }
    m.title_id = doc.at("title_id").get<std::string>();
    m.chunk_duration_s = doc.at("chunk_duration_s").get<double>();
    const auto& streams = doc.at("streams");
    if (!streams.is_array()) throw FormatError("`streams` must be an array");
    for (const auto& s : streams) {
      m.rates_kbps.push_back(s.at("rate_kbps").get<double>());
      m.chunk_sizes_kbit.push_back(
          s.at("chunk_sizes_kbit").get<std::vector<double>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest schema violation: ") + e.what());
  }

  if (auto report = validate_manifest(m); !report.empty()) {
    std::string msg = "invalid manifest:";
    for (const auto& issue : report) msg += " " + issue.describe() + ";";
    throw FormatError(msg);
  }
  return m;
}

VideoManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path));
}

std::string format_manifest(const VideoManifest& m) {
  std::string out = "{\n";
  out += "  \"format_version\": " + std::to_string(kManifestFormatVersion) + ",\n";
  out += "  \"title_id\": " + nlohmann::json(m.title_id).dump() + ",\n";
  out += "  \"chunk_duration_s\": " + format_number(m.chunk_duration_s) + ",\n";
  out += "  \"streams\": [\n";
  for (std::size_t i = 0; i < m.rates_kbps.size(); ++i) {
    out += "    {\"rate_kbps\": " + format_number(m.rates_kbps[i]) +
           ", \"chunk_sizes_kbit\": [";
    const auto& sizes = m.chunk_sizes_kbit[i];
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (k) out += ", ";
      out += format_number(sizes[k]);
    }
    out += i + 1 < m.rates_kbps.size() ? "]},\n" : "]}\n";
  }
  out += "  ]\n}\n";
  return out;
}

void save_manifest(const VideoManifest& manifest,
                   const std::filesystem::path& path) {
  write_text_file(path, format_manifest(manifest));
}

VideoManifest generate_vbr_manifest(std::span<const double> rates_kbps,
                                    std::size_t chunk_count,
                                    double chunk_duration_s, double dispersion,
                                    std::uint64_t seed) {
  if (!(dispersion >= 0.0)) throw InvalidInput("dispersion must be >= 0");
  if (chunk_count == 0) throw InvalidInput("chunk count must be positive");

  std::vector<double> multiplier(chunk_count, 1.0);
  if (dispersion > 0.0) {
    // Log-normal with unit mean: sigma^2 = ln(1 + cv^2), mu = -sigma^2 / 2.
    const double sigma2 = std::log1p(dispersion * dispersion);
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> dist(-0.5 * sigma2, std::sqrt(sigma2));
    for (auto& x : multiplier) x = dist(rng);
    const double mean =
        std::accumulate(multiplier.begin(), multiplier.end(), 0.0) /
        static_cast<double>(chunk_count);
    for (auto& x : multiplier) x /= mean;
  }

  VideoManifest m;
  m.title_id = "synthetic-" + std::to_string(seed);
  m.chunk_duration_s = chunk_duration_s;
  m.rates_kbps.assign(rates_kbps.begin(), rates_kbps.end());
  for (double rate : m.rates_kbps) {
    std::vector<double> sizes(chunk_count);
    for (std::size_t k = 0; k < chunk_count; ++k) {
      sizes[k] = chunk_duration_s * rate * multiplier[k];
    }
    m.chunk_sizes_kbit.push_back(std::move(sizes));
  }
  if (auto report = validate_manifest(m); !report.empty()) {
    throw InvalidInput("generated manifest invalid: " +
                       report.front().describe());
  }
  return m;
}

CapacityTrace generate_outage_trace(double base_kbps, double outage_start_s,
                                    double outage_len_s, double duration_s) {
  if (!(outage_start_s >= 0.0) || !(outage_len_s >= 0.0) ||
      !(outage_start_s + outage_len_s <= duration_s) ||
      (outage_len_s > 0.0 && !(outage_start_s < duration_s))) {
    throw InvalidInput("outage must lie within the trace duration");
  }
  if (outage_len_s == 0.0) return CapacityTrace::constant(base_kbps, duration_s);

  std::vector<CapacityPoint> points;
  if (outage_start_s > 0.0) points.push_back({0.0, base_kbps});
  points.push_back({outage_start_s, 0.0});
  if (outage_start_s + outage_len_s < duration_s) {
    points.push_back({outage_start_s + outage_len_s, base_kbps});
  }
  return CapacityTrace::from_points(std::move(points), duration_s);
}

CapacityTrace generate_piecewise_trace(const PiecewiseTraceParams& params,
                                       std::uint64_t seed) {
  if (!(params.min_kbps > 0.0) || !(params.max_kbps >= params.min_kbps) ||
      !(params.mean_segment_s > 0.0) || !(params.duration_s > 0.0)) {
    throw InvalidInput("invalid piecewise trace parameters");
  }
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> seg(1.0 / params.mean_segment_s);
  std::uniform_real_distribution<double> log_cap(std::log(params.min_kbps),
                                                 std::log(params.max_kbps));
  std::vector<CapacityPoint> points;
  double t = 0.0;
  while (t < params.duration_s) {
    points.push_back({t, std::exp(log_cap(rng))});
    double next = t + seg(rng);
    if (params.time_quantum_s > 0.0) {
      next = std::max(std::round(next / params.time_quantum_s), 1.0 +
                      std::round(t / params.time_quantum_s)) *
             params.time_quantum_s;
    }
    t = next;
  }
  return CapacityTrace::from_points(std::move(points), params.duration_s);
}

}  // namespace abrlab
