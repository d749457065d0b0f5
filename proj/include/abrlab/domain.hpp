#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abrlab {

// Sizes are kilobits and rates kb/s throughout, so a CBR chunk is exactly
// chunk_duration_s * rate_kbps.

struct VideoManifest {
  std::string title_id;
  double chunk_duration_s = 4.0;
  std::vector<double> rates_kbps;
  // [rate_index][chunk_index]
  std::vector<std::vector<double>> chunk_sizes_kbit;

  std::size_t rate_count() const { return rates_kbps.size(); }
  std::size_t chunk_count() const {
    return chunk_sizes_kbit.empty() ? 0 : chunk_sizes_kbit.front().size();
  }
  double chunk_kbit(std::size_t rate_index, std::size_t chunk_index) const {
    return chunk_sizes_kbit[rate_index][chunk_index];
  }
  double min_rate_kbps() const { return rates_kbps.front(); }
  double max_rate_kbps() const { return rates_kbps.back(); }
  double mean_chunk_kbit(std::size_t rate_index) const;

  bool operator==(const VideoManifest&) const = default;
};

// Every rate carries chunk_duration_s * rate_kbps kilobits per chunk.
VideoManifest make_cbr_manifest(std::vector<double> rates_kbps,
                                std::size_t chunk_count,
                                double chunk_duration_s,
                                std::string title_id = "cbr");

struct ValidationIssue {
  std::string message;
  std::optional<std::size_t> rate_index;
  std::optional<std::size_t> chunk_index;

  std::string describe() const;
  bool operator==(const ValidationIssue&) const = default;
};

using ValidationReport = std::vector<ValidationIssue>;

// Empty iff the manifest is well formed.
ValidationReport validate_manifest(const VideoManifest& manifest);

struct CapacityPoint {
  double time_s = 0.0;
  double capacity_kbps = 0.0;

  bool operator==(const CapacityPoint&) const = default;
};

// Piecewise-constant capacity. Each breakpoint holds until the next one and
// the last one holds until duration_s (which may be +inf).
struct CapacityTrace {
  std::vector<CapacityPoint> breakpoints;
  double duration_s = 0.0;

  // Validating factory; throws InvalidInput.
  static CapacityTrace from_points(std::vector<CapacityPoint> points,
                                   double duration_s);
  static CapacityTrace constant(double capacity_kbps, double duration_s);

  double capacity_at(double t) const;
  bool operator==(const CapacityTrace&) const = default;
};

ValidationReport validate_trace(const CapacityTrace& trace);

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientCapacity : public std::runtime_error {
 public:
  InsufficientCapacity(double delivered_kbit, double requested_kbit);
  double delivered_kbit() const { return delivered_kbit_; }

 private:
  double delivered_kbit_;
};

// Exact integral of the capacity over [t0, t1]. Throws std::out_of_range
// unless 0 <= t0 <= t1 <= duration_s.
double capacity_integral(const CapacityTrace& trace, double t0, double t1);

// Smallest t1 >= t0 with capacity_integral(trace, t0, t1) == kbit. Throws
// InsufficientCapacity when the trace ends first.
double invert_capacity(const CapacityTrace& trace, double t0, double kbit);

enum class AbrKind { kRminAlways, kEwma, kBba0, kBba1, kBba2, kBbaOthers };

std::string_view abr_name(AbrKind kind);
std::optional<AbrKind> parse_abr_kind(std::string_view name);
const std::vector<std::string>& abr_names();

enum class StartupPolicy {
  kFirstChunk,       // playback starts when the first chunk lands
  kResumeThreshold,  // playback starts once buffer >= resume threshold
};

enum class ReservoirMode {
  kMaxPrefixDeficit,  // worst cumulative deficit over the horizon
  kNetSum,            // total consumption minus resupply over the horizon
};

struct OutageProtectionParams {
  bool enabled = true;
  double per_chunk_s = 0.4;
  double fill_fraction_gate = 0.75;
  double cap_s = 80.0;
};

struct SessionConfig {
  double buffer_capacity_s = 240.0;
  StartupPolicy startup_policy = StartupPolicy::kFirstChunk;
  AbrKind abr_algorithm = AbrKind::kBba1;
  // Unset means one chunk duration.
  std::optional<double> resume_threshold_s;
  unsigned long long rng_seed = 1;
  double reservoir_min_s = 8.0;
  double reservoir_max_s = 140.0;
  double reservoir_horizon_s = 480.0;
  ReservoirMode reservoir_mode = ReservoirMode::kMaxPrefixDeficit;
  // BBA-0 uses a fixed reservoir.
  double bba0_reservoir_s = 90.0;
  // Where the linear cushion ends on an unshifted map, as a fraction of
  // buffer_capacity_s.
  double map_knee_fraction = 0.9;
  // Clamp sticky-rule set-builder results to the pinned map ends.
  bool pinned_map_ends = false;
  OutageProtectionParams outage_protection;
  std::size_t lookahead_window_chunks = 8;
  double ewma_history_weight = 0.8;
  double ewma_safety = 0.85;
  double initial_buffer_s = 0.0;

  double resume_threshold(double chunk_duration_s) const {
    return resume_threshold_s.value_or(chunk_duration_s);
  }
};

ValidationReport validate_config(const SessionConfig& cfg,
                                 double chunk_duration_s);

struct SessionState {
  double buffer_s = 0.0;
  std::size_t next_chunk_index = 0;
  std::size_t current_rate_index = 0;
  double clock_s = 0.0;
  bool playing = false;
  double reservoir_s = 0.0;
  double outage_protection_s = 0.0;
  bool in_startup_phase = true;
  double played_s = 0.0;

  bool operator==(const SessionState&) const = default;
};

enum class EventKind {
  kDownloadStart,
  kDownloadEnd,
  kRateSwitch,
  kRebufferStart,
  kRebufferEnd,
  kPlaybackStart,
  kPlaybackEnd,
};

std::string_view event_kind_name(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct SessionEvent {
  double time_s = 0.0;
  EventKind kind = EventKind::kDownloadStart;
  int rate_index = -1;
  int chunk_index = -1;
  double buffer_s = 0.0;

  bool operator==(const SessionEvent&) const = default;
};

struct SessionLog {
  std::string title_id;
  std::string algorithm;
  std::optional<std::string> window_tag;
  std::vector<SessionEvent> events;
  SessionState final_state;
  // Trace ran out before every chunk was downloaded.
  bool truncated = false;

  bool operator==(const SessionLog&) const = default;
};

}  // namespace abrlab
