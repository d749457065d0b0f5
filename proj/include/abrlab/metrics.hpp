#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abrlab/domain.hpp"

namespace abrlab {

// Seconds spent actually playing: stalls and time before the first frame are
// excluded.
double played_seconds(const SessionLog& log);
double stall_seconds(const SessionLog& log);
std::size_t rebuffer_count(const SessionLog& log);
std::size_t switch_count(const SessionLog& log);
std::size_t up_switch_count(const SessionLog& log);

// RebufferStart events per hour of playback. Absent without any playback.
std::optional<double> rebuffers_per_playhour(const SessionLog& log);

// Mean nominal rate over downloaded chunks (each holds V seconds, so equal
// weights). Chunks finishing before exclude_before_s are skipped. Absent when
// no chunk qualifies.
std::optional<double> average_video_rate(const SessionLog& log,
                                         const VideoManifest& manifest,
                                         double exclude_before_s = 0.0);

// Rate switches per hour of playback. Absent without any playback.
std::optional<double> switch_rate(const SessionLog& log);

struct SessionMetrics {
  std::optional<double> rebuffers_per_playhour;
  std::optional<double> average_video_rate_kbps;
  std::optional<double> switch_rate_per_playhour;
  std::size_t rebuffer_count = 0;
  std::size_t switch_count = 0;
  std::size_t chunks = 0;
  double played_s = 0.0;
  double stall_s = 0.0;
};

SessionMetrics compute_metrics(const SessionLog& log,
                               const VideoManifest& manifest);

struct SummaryInput {
  const SessionLog* log = nullptr;
  const VideoManifest* manifest = nullptr;
};

inline constexpr std::string_view kAllWindows = "all";
inline constexpr int kSummarySchemaVersion = 1;

struct SummaryRow {
  std::string algorithm;
  std::string window;
  std::size_t sessions = 0;
  double played_hours = 0.0;
  std::optional<double> rebuffers_per_playhour;
  std::optional<double> average_video_rate_kbps;
  std::optional<double> switch_rate_per_playhour;
  std::optional<double> stall_s_per_session;
  std::optional<double> normalized_rebuffers;
  std::optional<double> normalized_video_rate;
  std::optional<double> normalized_switch_rate;
};

struct SummaryTable {
  std::string control;
  std::vector<SummaryRow> rows;

  const SummaryRow* find(std::string_view algorithm,
                         std::string_view window = kAllWindows) const;
};

// Per-algorithm pooled metrics (events over total play hours, rate over all
// chunks) for every window tag plus "all", each also divided by the control's
// value for the same window. Throws InvalidInput if the control is missing.
SummaryTable aggregate_and_normalize(std::span<const SummaryInput> sessions,
                                     const std::string& control);

std::string summary_to_csv(const SummaryTable& table);
std::string summary_to_json(const SummaryTable& table);
std::string metrics_to_json(const SessionMetrics& metrics);

}  // namespace abrlab
