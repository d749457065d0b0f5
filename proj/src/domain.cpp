#include "abrlab/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace abrlab {

double VideoManifest::mean_chunk_kbit(std::size_t rate_index) const {
  const auto& sizes = chunk_sizes_kbit[rate_index];
  if (sizes.empty()) return 0.0;
  return std::accumulate(sizes.begin(), sizes.end(), 0.0) /
         static_cast<double>(sizes.size());
}

VideoManifest make_cbr_manifest(std::vector<double> rates_kbps,
                                std::size_t chunk_count,
                                double chunk_duration_s,
                                std::string title_id) {
  VideoManifest m;
  m.title_id = std::move(title_id);
  m.chunk_duration_s = chunk_duration_s;
  m.rates_kbps = std::move(rates_kbps);
  for (double rate : m.rates_kbps) {
    m.chunk_sizes_kbit.emplace_back(chunk_count, chunk_duration_s * rate);
  }
  return m;
}

std::string ValidationIssue::describe() const {
  std::ostringstream out;
  out << message;
  if (rate_index) out << " (rate index " << *rate_index;
  if (chunk_index) out << (rate_index ? ", " : " (") << "chunk " << *chunk_index;
  if (rate_index || chunk_index) out << ")";
  return out.str();
}

ValidationReport validate_manifest(const VideoManifest& m) {
  ValidationReport report;
  if (!(m.chunk_duration_s > 0.0) || !std::isfinite(m.chunk_duration_s)) {
    report.push_back({"chunk duration must be positive", {}, {}});
  }
  if (m.rates_kbps.size() < 2) {
    report.push_back({"at least two rates required", {}, {}});
  }
  for (std::size_t i = 0; i < m.rates_kbps.size(); ++i) {
    if (!(m.rates_kbps[i] > 0.0)) {
      report.push_back({"rate must be positive", i, {}});
    }
    if (i > 0 && !(m.rates_kbps[i] > m.rates_kbps[i - 1])) {
      report.push_back({"rates not ascending", i, {}});
    }
  }
  if (m.chunk_sizes_kbit.size() != m.rates_kbps.size()) {
    report.push_back({"chunk table does not have one stream per rate", {}, {}});
  }
  if (m.chunk_sizes_kbit.empty()) return report;

  const std::size_t expected = m.chunk_sizes_kbit.front().size();
  if (expected == 0) report.push_back({"stream has no chunks", 0, {}});
  for (std::size_t i = 0; i < m.chunk_sizes_kbit.size(); ++i) {
    const auto& stream = m.chunk_sizes_kbit[i];
    if (stream.size() != expected) {
      report.push_back({"unequal chunk counts", i, {}});
    }
    for (std::size_t k = 0; k < stream.size(); ++k) {
      if (!(stream[k] > 0.0) || !std::isfinite(stream[k])) {
        report.push_back({"chunk size must be positive", i, k});
      }
    }
  }
  return report;
}

ValidationReport validate_trace(const CapacityTrace& trace) {
  ValidationReport report;
  const auto& pts = trace.breakpoints;
  if (pts.empty()) {
    report.push_back({"trace has no breakpoints", {}, {}});
    return report;
  }
  if (pts.front().time_s != 0.0) {
    report.push_back({"first breakpoint must be at time 0", {}, {}});
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].time_s)) {
      report.push_back({"breakpoint time not finite at breakpoint " + std::to_string(i), {}, {}});
    }
    if (i > 0 && !(pts[i].time_s > pts[i - 1].time_s)) {
      report.push_back({"breakpoint times not increasing at breakpoint " + std::to_string(i), {}, {}});
    }
    if (!(pts[i].capacity_kbps >= 0.0) || !std::isfinite(pts[i].capacity_kbps)) {
      report.push_back({"negative capacity at breakpoint " + std::to_string(i), {}, {}});
    }
  }
  if (!(trace.duration_s > pts.back().time_s)) {
    report.push_back({"duration must extend past the last breakpoint", {}, {}});
  }
  return report;
}

CapacityTrace CapacityTrace::from_points(std::vector<CapacityPoint> points,
                                         double duration_s) {
  CapacityTrace trace{std::move(points), duration_s};
  auto report = validate_trace(trace);
  if (!report.empty()) throw InvalidInput(report.front().describe());
  return trace;
}

CapacityTrace CapacityTrace::constant(double capacity_kbps, double duration_s) {
  return from_points({{0.0, capacity_kbps}}, duration_s);
}

double CapacityTrace::capacity_at(double t) const {
  auto it = std::upper_bound(
      breakpoints.begin(), breakpoints.end(), t,
      [](double value, const CapacityPoint& p) { return value < p.time_s; });
  if (it == breakpoints.begin()) return breakpoints.front().capacity_kbps;
  return std::prev(it)->capacity_kbps;
}

namespace {

// Index of the segment containing t (the last breakpoint with time <= t).
std::size_t segment_at(const CapacityTrace& trace, double t) {
  auto it = std::upper_bound(
      trace.breakpoints.begin(), trace.breakpoints.end(), t,
      [](double value, const CapacityPoint& p) { return value < p.time_s; });
  return it == trace.breakpoints.begin()
             ? 0
             : static_cast<std::size_t>(it - trace.breakpoints.begin()) - 1;
}

double segment_end(const CapacityTrace& trace, std::size_t i) {
  return i + 1 < trace.breakpoints.size() ? trace.breakpoints[i + 1].time_s
                                          : trace.duration_s;
}

}  // namespace

InsufficientCapacity::InsufficientCapacity(double delivered_kbit,
                                           double requested_kbit)
    : std::runtime_error("trace delivers " + std::to_string(delivered_kbit) +
                         " kbit before it ends, " +
                         std::to_string(requested_kbit) + " requested"),
      delivered_kbit_(delivered_kbit) {}

double capacity_integral(const CapacityTrace& trace, double t0, double t1) {
  if (!(t0 >= 0.0) || !(t1 >= t0) || !(t1 <= trace.duration_s)) {
    throw std::out_of_range("capacity_integral: interval outside trace");
  }
  double total = 0.0;
  for (std::size_t i = segment_at(trace, t0); i < trace.breakpoints.size();
       ++i) {
    const double lo = std::max(t0, trace.breakpoints[i].time_s);
    const double hi = std::min(t1, segment_end(trace, i));
    if (hi <= lo) break;
    total += trace.breakpoints[i].capacity_kbps * (hi - lo);
  }
  return total;
}

double invert_capacity(const CapacityTrace& trace, double t0, double kbit) {
  if (!(kbit >= 0.0)) throw std::out_of_range("invert_capacity: negative size");
  if (!(t0 >= 0.0) || !(t0 <= trace.duration_s)) {
    throw std::out_of_range("invert_capacity: start outside trace");
  }
  if (kbit == 0.0) return t0;
  double remaining = kbit;
  double t = t0;
  for (std::size_t i = segment_at(trace, t0); i < trace.breakpoints.size();
       ++i) {
    const double c = trace.breakpoints[i].capacity_kbps;
    const double end = segment_end(trace, i);
    if (c > 0.0) {
      const double available = c * (end - t);
      if (available >= remaining) return t + remaining / c;
      remaining -= available;
    }
    t = end;
  }
  throw InsufficientCapacity(kbit - remaining, kbit);
}

namespace {

constexpr std::array<std::pair<AbrKind, std::string_view>, 6> kAbrNames{{
    {AbrKind::kRminAlways, "rmin_always"},
    {AbrKind::kEwma, "ewma"},
    {AbrKind::kBba0, "bba0"},
    {AbrKind::kBba1, "bba1"},
    {AbrKind::kBba2, "bba2"},
    {AbrKind::kBbaOthers, "bba_others"},
}};

constexpr std::array<std::pair<EventKind, std::string_view>, 7> kEventNames{{
    {EventKind::kDownloadStart, "DownloadStart"},
    {EventKind::kDownloadEnd, "DownloadEnd"},
    {EventKind::kRateSwitch, "RateSwitch"},
    {EventKind::kRebufferStart, "RebufferStart"},
    {EventKind::kRebufferEnd, "RebufferEnd"},
    {EventKind::kPlaybackStart, "PlaybackStart"},
    {EventKind::kPlaybackEnd, "PlaybackEnd"},
}};

}  // namespace

std::string_view abr_name(AbrKind kind) {
  for (const auto& [k, name] : kAbrNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<AbrKind> parse_abr_kind(std::string_view name) {
  for (const auto& [k, n] : kAbrNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<std::string>& abr_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : kAbrNames) out.emplace_back(entry.second);
    return out;
  }();
  return names;
}

std::string_view event_kind_name(EventKind kind) {
  for (const auto& [k, name] : kEventNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (const auto& [k, n] : kEventNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

ValidationReport validate_config(const SessionConfig& cfg,
                                 double chunk_duration_s) {
  ValidationReport report;
  if (!(cfg.buffer_capacity_s > cfg.reservoir_max_s)) {
    report.push_back({"buffer capacity must exceed the reservoir upper bound",
                      {}, {}});
  }
  if (!(cfg.reservoir_min_s >= 0.0) ||
      !(cfg.reservoir_min_s <= cfg.reservoir_max_s)) {
    report.push_back({"reservoir bounds must satisfy 0 <= min <= max", {}, {}});
  }
  const double resume = cfg.resume_threshold(chunk_duration_s);
  if (!(resume >= 0.0) || !(resume <= cfg.buffer_capacity_s)) {
    report.push_back({"resume threshold must lie within [0, buffer capacity]",
                      {}, {}});
  }
  if (!(cfg.buffer_capacity_s >= chunk_duration_s)) {
    report.push_back({"buffer must hold at least one chunk", {}, {}});
  }
  if (!(cfg.map_knee_fraction > 0.0) || !(cfg.map_knee_fraction <= 1.0)) {
    report.push_back({"map knee fraction must lie in (0, 1]", {}, {}});
  }
  if (!(cfg.bba0_reservoir_s >= 0.0) ||
      !(cfg.bba0_reservoir_s < cfg.map_knee_fraction * cfg.buffer_capacity_s)) {
    report.push_back({"BBA-0 reservoir must sit below the map knee", {}, {}});
  }
  if (cfg.lookahead_window_chunks < 1) {
    report.push_back({"lookahead window must be at least one chunk", {}, {}});
  }
  if (!(cfg.ewma_history_weight >= 0.0) || !(cfg.ewma_history_weight < 1.0)) {
    report.push_back({"EWMA history weight must lie in [0, 1)", {}, {}});
  }
  if (!(cfg.ewma_safety > 0.0)) {
    report.push_back({"EWMA safety factor must be positive", {}, {}});
  }
  const auto& op = cfg.outage_protection;
  if (!(op.per_chunk_s >= 0.0) || !(op.cap_s >= 0.0) ||
      !(op.fill_fraction_gate >= 0.0) || !(op.fill_fraction_gate <= 1.0)) {
    report.push_back({"invalid outage protection parameters", {}, {}});
  }
  if (!(cfg.initial_buffer_s >= 0.0) ||
      !(cfg.initial_buffer_s <= cfg.buffer_capacity_s)) {
    report.push_back({"initial buffer must lie within [0, buffer capacity]",
                      {}, {}});
  }
  return report;
}

}  // namespace abrlab
