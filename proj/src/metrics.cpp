#include "abrlab/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "abrlab/traces_io.hpp"
#include "json.hpp"

namespace abrlab {

namespace {

constexpr double kSecondsPerHour = 3600.0;

struct Intervals {
  double played = 0.0;
  double stalled = 0.0;
};

Intervals scan_intervals(const SessionLog& log) {
  Intervals out;
  bool playing = false;
  bool stalled = false;
  double since = 0.0;
  for (const auto& e : log.events) {
    if (playing) out.played += e.time_s - since;
    if (stalled) out.stalled += e.time_s - since;
    since = e.time_s;
    switch (e.kind) {
      case EventKind::kPlaybackStart:
      case EventKind::kRebufferEnd:
        playing = true;
        stalled = false;
        break;
      case EventKind::kRebufferStart:
        playing = false;
        stalled = true;
        break;
      case EventKind::kPlaybackEnd:
        playing = false;
        stalled = false;
        break;
      default:
        break;
    }
  }
  return out;
}

bool has_playback(const SessionLog& log) {
  return std::any_of(log.events.begin(), log.events.end(), [](const auto& e) {
    return e.kind == EventKind::kPlaybackStart;
  });
}

std::size_t count_kind(const SessionLog& log, EventKind kind) {
  return static_cast<std::size_t>(
      std::count_if(log.events.begin(), log.events.end(),
                    [kind](const auto& e) { return e.kind == kind; }));
}

std::optional<double> per_playhour(const SessionLog& log, std::size_t count) {
  if (!has_playback(log)) return std::nullopt;
  const double played = played_seconds(log);
  if (!(played > 0.0)) return std::nullopt;
  return static_cast<double>(count) / (played / kSecondsPerHour);
}

std::optional<double> ratio(std::optional<double> value,
                            std::optional<double> control) {
  if (!value || !control || *control == 0.0) return std::nullopt;
  return *value / *control;
}

}  // namespace

double played_seconds(const SessionLog& log) {
  return scan_intervals(log).played;
}

double stall_seconds(const SessionLog& log) {
  return scan_intervals(log).stalled;
}

std::size_t rebuffer_count(const SessionLog& log) {
  return count_kind(log, EventKind::kRebufferStart);
}

std::size_t switch_count(const SessionLog& log) {
  return count_kind(log, EventKind::kRateSwitch);
}

std::size_t up_switch_count(const SessionLog& log) {
  std::size_t ups = 0;
  int prev = -1;
  for (const auto& e : log.events) {
    if (e.kind != EventKind::kDownloadStart) continue;
    if (prev >= 0 && e.rate_index > prev) ++ups;
    prev = e.rate_index;
  }
  return ups;
}

std::optional<double> rebuffers_per_playhour(const SessionLog& log) {
  return per_playhour(log, rebuffer_count(log));
}

std::optional<double> switch_rate(const SessionLog& log) {
  return per_playhour(log, switch_count(log));
}

std::optional<double> average_video_rate(const SessionLog& log,
                                         const VideoManifest& manifest,
                                         double exclude_before_s) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : log.events) {
    if (e.kind != EventKind::kDownloadEnd || e.time_s < exclude_before_s) {
      continue;
    }
    sum += manifest.rates_kbps.at(static_cast<std::size_t>(e.rate_index));
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

SessionMetrics compute_metrics(const SessionLog& log,
                               const VideoManifest& manifest) {
  SessionMetrics m;
  const Intervals iv = scan_intervals(log);
  m.played_s = iv.played;
  m.stall_s = iv.stalled;
  m.rebuffer_count = rebuffer_count(log);
  m.switch_count = switch_count(log);
  m.chunks = count_kind(log, EventKind::kDownloadEnd);
  m.rebuffers_per_playhour = rebuffers_per_playhour(log);
  m.switch_rate_per_playhour = switch_rate(log);
  m.average_video_rate_kbps = average_video_rate(log, manifest);
  return m;
}

const SummaryRow* SummaryTable::find(std::string_view algorithm,
                                     std::string_view window) const {
  for (const auto& row : rows) {
    if (row.algorithm == algorithm && row.window == window) return &row;
  }
  return nullptr;
}

SummaryTable aggregate_and_normalize(std::span<const SummaryInput> sessions,
                                     const std::string& control) {
  struct Acc {
    std::size_t sessions = 0;
    double played_s = 0.0;
    double stall_s = 0.0;
    std::size_t rebuffers = 0;
    std::size_t switches = 0;
    double rate_sum = 0.0;
    std::size_t chunks = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  std::set<std::string> algorithms;

  for (const auto& s : sessions) {
    const SessionMetrics m = compute_metrics(*s.log, *s.manifest);
    double rate_sum = 0.0;
    for (const auto& e : s.log->events) {
      if (e.kind == EventKind::kDownloadEnd) {
        rate_sum += s.manifest->rates_kbps.at(static_cast<std::size_t>(e.rate_index));
      }
    }
    algorithms.insert(s.log->algorithm);
    std::vector<std::string> windows{std::string(kAllWindows)};
    if (s.log->window_tag && *s.log->window_tag != kAllWindows) {
      windows.push_back(*s.log->window_tag);
    }
    for (const auto& w : windows) {
      Acc& a = acc[{s.log->algorithm, w}];
      ++a.sessions;
      a.played_s += m.played_s;
      a.stall_s += m.stall_s;
      a.rebuffers += m.rebuffer_count;
      a.switches += m.switch_count;
      a.rate_sum += rate_sum;
      a.chunks += m.chunks;
    }
  }
  if (!algorithms.contains(control)) {
    throw InvalidInput("control algorithm `" + control + "` not in batch");
  }

  SummaryTable table;
  table.control = control;
  for (const auto& [key, a] : acc) {
    SummaryRow row;
    row.algorithm = key.first;
    row.window = key.second;
    row.sessions = a.sessions;
    row.played_hours = a.played_s / kSecondsPerHour;
    if (a.played_s > 0.0) {
      row.rebuffers_per_playhour = static_cast<double>(a.rebuffers) / row.played_hours;
      row.switch_rate_per_playhour = static_cast<double>(a.switches) / row.played_hours;
    }
    if (a.chunks > 0) {
      row.average_video_rate_kbps = a.rate_sum / static_cast<double>(a.chunks);
    }
    row.stall_s_per_session = a.stall_s / static_cast<double>(a.sessions);
    table.rows.push_back(std::move(row));
  }
  // "all" before named windows, then by algorithm.
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const SummaryRow& a, const SummaryRow& b) {
                     return std::make_tuple(a.window != kAllWindows, a.window,
                                            a.algorithm) <
                            std::make_tuple(b.window != kAllWindows, b.window,
                                            b.algorithm);
                   });
  for (auto& row : table.rows) {
    const SummaryRow* base = nullptr;
    for (const auto& r : table.rows) {
      if (r.algorithm == control && r.window == row.window) base = &r;
    }
    if (!base) continue;
    row.normalized_rebuffers =
        ratio(row.rebuffers_per_playhour, base->rebuffers_per_playhour);
    row.normalized_video_rate =
        ratio(row.average_video_rate_kbps, base->average_video_rate_kbps);
    row.normalized_switch_rate =
        ratio(row.switch_rate_per_playhour, base->switch_rate_per_playhour);
  }
  return table;
}

namespace {

std::string csv_cell(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

nlohmann::ordered_json json_value(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string summary_to_csv(const SummaryTable& table) {
  std::string out =
      "# abrlab-summary v" + std::to_string(kSummarySchemaVersion) +
      " control=" + table.control + "\n"
      "algorithm,window,sessions,played_hours,rebuffers_per_playhour,"
      "average_video_rate_kbps,switch_rate_per_playhour,stall_s_per_session,"
      "normalized_rebuffers,normalized_video_rate,normalized_switch_rate\n";
  for (const auto& r : table.rows) {
    out += r.algorithm + "," + r.window + "," + std::to_string(r.sessions) + "," +
           format_number(r.played_hours) + "," +
           csv_cell(r.rebuffers_per_playhour) + "," +
           csv_cell(r.average_video_rate_kbps) + "," +
           csv_cell(r.switch_rate_per_playhour) + "," +
           csv_cell(r.stall_s_per_session) + "," +
           csv_cell(r.normalized_rebuffers) + "," +
           csv_cell(r.normalized_video_rate) + "," +
           csv_cell(r.normalized_switch_rate) + "\n";
  }
  return out;
}

std::string summary_to_json(const SummaryTable& table) {
  nlohmann::ordered_json doc;
  doc["schema"] = "abrlab-summary";
  doc["schema_version"] = kSummarySchemaVersion;
  doc["control"] = table.control;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json row;
    row["algorithm"] = r.algorithm;
    row["window"] = r.window;
    row["sessions"] = r.sessions;
    row["played_hours"] = r.played_hours;
    row["rebuffers_per_playhour"] = json_value(r.rebuffers_per_playhour);
    row["average_video_rate_kbps"] = json_value(r.average_video_rate_kbps);
    row["switch_rate_per_playhour"] = json_value(r.switch_rate_per_playhour);
    row["stall_s_per_session"] = json_value(r.stall_s_per_session);
    row["normalized_rebuffers"] = json_value(r.normalized_rebuffers);
    row["normalized_video_rate"] = json_value(r.normalized_video_rate);
    row["normalized_switch_rate"] = json_value(r.normalized_switch_rate);
    doc["rows"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::string metrics_to_json(const SessionMetrics& m) {
  nlohmann::ordered_json doc;
  doc["schema"] = "abrlab-metrics";
  doc["schema_version"] = kSummarySchemaVersion;
  doc["rebuffers_per_playhour"] = json_value(m.rebuffers_per_playhour);
  doc["average_video_rate_kbps"] = json_value(m.average_video_rate_kbps);
  doc["switch_rate_per_playhour"] = json_value(m.switch_rate_per_playhour);
  doc["rebuffer_count"] = m.rebuffer_count;
  doc["switch_count"] = m.switch_count;
  doc["chunks"] = m.chunks;
  doc["played_s"] = m.played_s;
  doc["stall_s"] = m.stall_s;
  return doc.dump(2) + "\n";
}

}  // namespace abrlab
