#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "abrlab/algorithms.hpp"
#include "abrlab/domain.hpp"

namespace abrlab {

using RateSelector = std::function<AbrDecision(const AbrDecisionContext&)>;

// Rate index to use for each chunk index.
using FixedRatePolicy = std::function<std::size_t(std::size_t chunk_index)>;

RateSelector fixed_rate_selector(FixedRatePolicy policy);

// Runs one playback session and records every download, switch, and stall.
//
// Rates are chosen only at session start and when a chunk finishes. While a
// chunk downloads the buffer drains at unit rate if playing and gains V
// seconds when the chunk lands. A request is held back while buffer + V
// would exceed B_max. Playback starts per cfg.startup_policy; a stall starts
// when the buffer empties while playing and ends once the buffer reaches the
// resume threshold. If the trace cannot deliver a chunk, the session stalls
// to the end of the trace and the log is flagged truncated.
//
// Throws InvalidInput for an invalid manifest, trace or config.
SessionLog simulate_session(const VideoManifest& manifest,
                            const CapacityTrace& trace, AbrKind algorithm,
                            const SessionConfig& cfg);

// Same engine with a caller-supplied policy. The context carries the BBA-1
// chunk map.
SessionLog simulate_session(const VideoManifest& manifest,
                            const CapacityTrace& trace,
                            const RateSelector& selector,
                            const SessionConfig& cfg,
                            std::string algorithm_name = "custom");

struct FluidSample {
  double time_s = 0.0;
  double buffer_s = 0.0;
};

struct FluidChunkBoundary {
  std::size_t chunk_index = 0;
  double time_s = 0.0;
  double buffer_s = 0.0;
};

struct FluidSeries {
  std::vector<FluidChunkBoundary> boundaries;
  std::vector<FluidSample> samples;
  std::size_t rebuffers = 0;
};

// Fixed-step integration of dB/dt = C(t)/R(t) - 1 for a CBR manifest under a
// fixed-rate policy. Download stops while B >= B_max. Exists as an
// independent check on simulate_session.
FluidSeries fluid_oracle(const VideoManifest& cbr_manifest,
                         const CapacityTrace& trace,
                         const FixedRatePolicy& policy,
                         const SessionConfig& cfg, double dt_s,
                         double sample_every_s = 1.0);

struct TimeseriesRow {
  double time_s = 0.0;
  double buffer_s = 0.0;
  double rate_kbps = 0.0;

  bool operator==(const TimeseriesRow&) const = default;
};

// Buffer trajectory at every event time plus a fixed cadence. rate_kbps is
// the rate of the most recently requested chunk.
std::vector<TimeseriesRow> sample_timeseries(const SessionLog& log,
                                             const VideoManifest& manifest,
                                             double cadence_s = 1.0);

}  // namespace abrlab
