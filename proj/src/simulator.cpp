#include "abrlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "abrlab/maps.hpp"

namespace abrlab {

namespace {

// A chunk landing within this many seconds of the buffer emptying does not
// count as a stall.
constexpr double kTouchEpsilonS = 1e-9;

bool accrues_protection(std::optional<AbrKind> kind) {
  return kind == AbrKind::kBba1 || kind == AbrKind::kBba2 ||
         kind == AbrKind::kBbaOthers;
}

bool has_startup_phase(std::optional<AbrKind> kind) {
  return kind == AbrKind::kBba2 || kind == AbrKind::kBbaOthers;
}

void require_valid(const VideoManifest& manifest, const CapacityTrace& trace,
                   const SessionConfig& cfg) {
  if (auto r = validate_manifest(manifest); !r.empty()) {
    throw InvalidInput("manifest: " + r.front().describe());
  }
  if (auto r = validate_trace(trace); !r.empty()) {
    throw InvalidInput("trace: " + r.front().describe());
  }
  if (auto r = validate_config(cfg, manifest.chunk_duration_s); !r.empty()) {
    throw InvalidInput("config: " + r.front().describe());
  }
}

class SessionEngine {
 public:
  SessionEngine(const VideoManifest& manifest, const CapacityTrace& trace,
                const SessionConfig& cfg, std::optional<AbrKind> kind,
                const RateSelector* selector)
      : manifest_(manifest),
        trace_(trace),
        cfg_(cfg),
        kind_(kind),
        selector_(selector),
        v_(manifest.chunk_duration_s),
        resume_s_(cfg.resume_threshold(manifest.chunk_duration_s)) {}

  SessionLog run(std::string algorithm_name) {
    log_.title_id = manifest_.title_id;
    log_.algorithm = std::move(algorithm_name);
    state_.buffer_s = cfg_.initial_buffer_s;
    state_.in_startup_phase = has_startup_phase(kind_);
    if (state_.buffer_s > 0.0) begin_playback();

    const std::size_t n = manifest_.chunk_count();
    for (std::size_t k = 0; k < n; ++k) {
      state_.next_chunk_index = k;
      if (!wait_for_room()) break;
      if (!download(k)) break;
    }
    state_.next_chunk_index = downloaded_;
    finish();
    log_.final_state = state_;
    return std::move(log_);
  }

 private:
  void emit(EventKind kind, int rate = -1, int chunk = -1) {
    log_.events.push_back({state_.clock_s, kind, rate, chunk, state_.buffer_s});
  }

  void begin_playback() {
    if (!started_) {
      started_ = true;
      emit(EventKind::kPlaybackStart);
    } else if (rebuffering_) {
      rebuffering_ = false;
      emit(EventKind::kRebufferEnd);
    }
    state_.playing = true;
  }

  // Moves the clock to `until`, draining the buffer if playing.
  void advance(double until) {
    const double dt = until - state_.clock_s;
    if (dt <= 0.0) return;
    if (state_.playing) {
      if (state_.buffer_s + kTouchEpsilonS >= dt) {
        state_.buffer_s = std::max(state_.buffer_s - dt, 0.0);
        state_.played_s += dt;
      } else {
        state_.clock_s += state_.buffer_s;
        state_.played_s += state_.buffer_s;
        state_.buffer_s = 0.0;
        state_.playing = false;
        rebuffering_ = true;
        emit(EventKind::kRebufferStart);
      }
    }
    state_.clock_s = until;
  }

  double trace_end() const {
    if (std::isfinite(trace_.duration_s)) return trace_.duration_s;
    return std::max(state_.clock_s, trace_.breakpoints.back().time_s);
  }

  void truncate() {
    advance(std::max(trace_end(), state_.clock_s));
    log_.truncated = true;
    truncated_ = true;
  }

  // Holds the request back while the chunk would not fit. False if the
  // trace ends first.
  bool wait_for_room() {
    const double excess = state_.buffer_s + v_ - cfg_.buffer_capacity_s;
    if (excess <= 0.0) return true;
    // Nothing more can be fetched, so a stalled player resumes here.
    if (!state_.playing) begin_playback();
    const double until = state_.clock_s + excess;
    if (std::isfinite(trace_.duration_s) && until > trace_.duration_s) {
      truncate();
      return false;
    }
    advance(until);
    return true;
  }

  MapSpec decision_map() {
    if (kind_ == AbrKind::kBba0) {
      return make_rate_map(manifest_, cfg_, cfg_.bba0_reservoir_s);
    }
    const double reservoir =
        compute_reservoir(manifest_, state_.next_chunk_index, cfg_);
    const MapSpec base = make_chunk_map(manifest_, cfg_, reservoir);
    const double protection =
        accrues_protection(kind_) ? state_.outage_protection_s : 0.0;
    MapSpec map = effective_map(base, reservoir, protection,
                                kind_ == AbrKind::kBbaOthers, previous_shift_);
    previous_shift_ = map.reservoir_s;
    state_.reservoir_s = map.reservoir_s;
    return map;
  }

  AbrDecision decide() {
    const MapSpec map = decision_map();
    const AbrDecisionContext ctx{state_,
                                 manifest_,
                                 map,
                                 last_download_,
                                 cfg_.lookahead_window_chunks,
                                 ewma_kbps_,
                                 cfg_.ewma_safety,
                                 cfg_.pinned_map_ends};
    return kind_ ? select_rate(*kind_, ctx) : (*selector_)(ctx);
  }

  bool download(std::size_t k) {
    const AbrDecision decision = decide();
    const std::size_t rate = std::min(decision.rate_index,
                                      manifest_.rate_count() - 1);
    if (has_startup_phase(kind_)) {
      state_.in_startup_phase = decision.in_startup_phase;
    } else {
      state_.in_startup_phase = false;
    }
    if (k > 0 && rate != state_.current_rate_index) {
      emit(EventKind::kRateSwitch, static_cast<int>(rate), static_cast<int>(k));
    }
    state_.current_rate_index = rate;

    const double kbit = manifest_.chunk_kbit(rate, k);
    const double start = state_.clock_s;
    const double before = state_.buffer_s;
    emit(EventKind::kDownloadStart, static_cast<int>(rate), static_cast<int>(k));

    double end = 0.0;
    try {
      end = invert_capacity(trace_, start, kbit);
    } catch (const InsufficientCapacity&) {
      truncate();
      return false;
    }
    advance(end);
    state_.buffer_s += v_;
    ++downloaded_;
    emit(EventKind::kDownloadEnd, static_cast<int>(rate), static_cast<int>(k));

    last_download_ = DownloadRecord{k, rate, start, end, kbit};
    if (end > start) {
      ewma_kbps_ = update_throughput_ewma(ewma_kbps_, kbit / (end - start),
                                          cfg_.ewma_history_weight);
    }
    if (accrues_protection(kind_)) {
      state_.outage_protection_s =
          accrue_outage_protection(state_, cfg_, state_.buffer_s > before);
    }

    if (!started_) {
      if (cfg_.startup_policy == StartupPolicy::kFirstChunk ||
          state_.buffer_s >= resume_s_) {
        begin_playback();
      }
    } else if (rebuffering_ && state_.buffer_s >= resume_s_) {
      begin_playback();
    }
    return true;
  }

  void finish() {
    if (truncated_) {
      if (started_ && state_.playing) {
        state_.playing = false;
        emit(EventKind::kPlaybackEnd);
      }
      return;
    }
    if (!state_.playing && (state_.buffer_s > 0.0 || rebuffering_)) {
      begin_playback();
    }
    if (!started_) return;
    advance(state_.clock_s + state_.buffer_s);
    state_.buffer_s = 0.0;
    state_.playing = false;
    emit(EventKind::kPlaybackEnd);
  }

  const VideoManifest& manifest_;
  const CapacityTrace& trace_;
  const SessionConfig& cfg_;
  std::optional<AbrKind> kind_;
  const RateSelector* selector_;
  const double v_;
  const double resume_s_;

  SessionState state_;
  SessionLog log_;
  bool started_ = false;
  bool rebuffering_ = false;
  bool truncated_ = false;
  std::size_t downloaded_ = 0;
  double previous_shift_ = 0.0;
  std::optional<DownloadRecord> last_download_;
  std::optional<double> ewma_kbps_;
};

}  // namespace

RateSelector fixed_rate_selector(FixedRatePolicy policy) {
  return [policy = std::move(policy)](const AbrDecisionContext& ctx) {
    return AbrDecision{policy(ctx.state.next_chunk_index), false};
  };
}

SessionLog simulate_session(const VideoManifest& manifest,
                            const CapacityTrace& trace, AbrKind algorithm,
                            const SessionConfig& cfg) {
  require_valid(manifest, trace, cfg);
  return SessionEngine(manifest, trace, cfg, algorithm, nullptr)
      .run(std::string(abr_name(algorithm)));
}

SessionLog simulate_session(const VideoManifest& manifest,
                            const CapacityTrace& trace,
                            const RateSelector& selector,
                            const SessionConfig& cfg,
                            std::string algorithm_name) {
  require_valid(manifest, trace, cfg);
  return SessionEngine(manifest, trace, cfg, std::nullopt, &selector)
      .run(std::move(algorithm_name));
}

std::vector<TimeseriesRow> sample_timeseries(const SessionLog& log,
                                             const VideoManifest& manifest,
                                             double cadence_s) {
  std::vector<TimeseriesRow> rows;
  if (log.events.empty()) return rows;

  bool playing = false;
  double rate = 0.0;
  double anchor_t = log.events.front().time_s;
  double anchor_b = log.events.front().buffer_s;
  std::size_t tick = 0;

  auto buffer_at = [&](double t) {
    return playing ? std::max(anchor_b - (t - anchor_t), 0.0) : anchor_b;
  };

  for (const auto& e : log.events) {
    while (cadence_s > 0.0 && static_cast<double>(tick) * cadence_s < e.time_s) {
      const double t = static_cast<double>(tick++) * cadence_s;
      rows.push_back({t, buffer_at(t), rate});
    }
    switch (e.kind) {
      case EventKind::kPlaybackStart:
      case EventKind::kRebufferEnd:
        playing = true;
        break;
      case EventKind::kRebufferStart:
      case EventKind::kPlaybackEnd:
        playing = false;
        break;
      case EventKind::kDownloadStart:
      case EventKind::kRateSwitch:
        if (e.rate_index >= 0) rate = manifest.rates_kbps[e.rate_index];
        break;
      case EventKind::kDownloadEnd:
        break;
    }
    anchor_t = e.time_s;
    anchor_b = e.buffer_s;
    const TimeseriesRow row{e.time_s, e.buffer_s, rate};
    if (rows.empty() || rows.back() != row) rows.push_back(row);
    // A tick landing exactly on an event is already covered by its row.
    while (cadence_s > 0.0 && static_cast<double>(tick) * cadence_s <= e.time_s) {
      ++tick;
    }
  }
  return rows;
}

}  // namespace abrlab
