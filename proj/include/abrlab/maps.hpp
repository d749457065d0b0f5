#pragma once

#include <cstddef>

#include "abrlab/domain.hpp"

namespace abrlab {

enum class MapKind { kRateMap, kChunkMap };

// A piecewise-linear map from buffer occupancy (seconds) to either a video
// rate (kb/s) or a maximum next-chunk size (kbit): flat at `floor` up to the
// reservoir, linear across the cushion, flat at `ceiling` afterwards.
struct MapSpec {
  MapKind kind = MapKind::kRateMap;
  double reservoir_s = 0.0;
  double cushion_s = 1.0;
  double floor = 0.0;
  double ceiling = 1.0;
  double buffer_max_s = 240.0;

  double upper_flat_start_s() const { return reservoir_s + cushion_s; }
  bool operator==(const MapSpec&) const = default;
};

ValidationReport validate_map(const MapSpec& spec);

// Floor R_min, ceiling R_max; the cushion ends at
// cfg.map_knee_fraction * B_max.
MapSpec make_rate_map(const VideoManifest& manifest, const SessionConfig& cfg,
                      double reservoir_s);

// Floor V * R_min, ceiling the mean chunk size of the R_max stream.
MapSpec make_chunk_map(const VideoManifest& manifest, const SessionConfig& cfg,
                       double reservoir_s);

// Throws std::out_of_range unless 0 <= buffer_s <= buffer_max_s.
double eval_map(const MapSpec& spec, double buffer_s);

struct ReservoirBounds {
  double min_s = 8.0;
  double max_s = 140.0;
};

// Buffer needed to keep playing R_min when capacity is exactly R_min over
// the next ceil(horizon_s / V) chunks, clamped to `bounds`. Each chunk
// drains Chunk[R_min][k] / R_min seconds and resupplies V.
double compute_reservoir(const VideoManifest& manifest,
                         std::size_t playhead_chunk, double horizon_s,
                         ReservoirBounds bounds,
                         ReservoirMode mode = ReservoirMode::kMaxPrefixDeficit);

double compute_reservoir(const VideoManifest& manifest,
                         std::size_t playhead_chunk, const SessionConfig& cfg);

// Outage-protection credit after one more completed download. Credit only
// grows while the buffer is rising and below the fill gate, and never in the
// startup phase; it is capped.
double accrue_outage_protection(const SessionState& state,
                                const SessionConfig& cfg,
                                bool buffer_increasing);

// Shift `base` right to reservoir_now + protection. In monotone mode the
// shift never moves left of previous_shift. The cushion width is kept unless
// that would push the upper knee past B_max, in which case it is clipped.
MapSpec effective_map(const MapSpec& base, double reservoir_now,
                      double protection_s, bool monotone,
                      double previous_shift_s);

}  // namespace abrlab
