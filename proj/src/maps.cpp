#include "abrlab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abrlab {

namespace {

// Keeps the linear region non-degenerate when a shift lands at B_max.
constexpr double kMinCushionS = 1e-6;

MapSpec make_map(MapKind kind, double floor, double ceiling,
                 const SessionConfig& cfg, double reservoir_s) {
  MapSpec spec;
  spec.kind = kind;
  spec.buffer_max_s = cfg.buffer_capacity_s;
  spec.reservoir_s = reservoir_s;
  spec.cushion_s = std::max(
      cfg.map_knee_fraction * cfg.buffer_capacity_s - reservoir_s,
      kMinCushionS);
  if (spec.upper_flat_start_s() > spec.buffer_max_s) {
    spec.reservoir_s = spec.buffer_max_s - spec.cushion_s;
  }
  spec.floor = floor;
  spec.ceiling = ceiling;
  return spec;
}

}  // namespace

ValidationReport validate_map(const MapSpec& spec) {
  ValidationReport report;
  if (!(spec.reservoir_s >= 0.0)) report.push_back({"negative reservoir", {}, {}});
  if (!(spec.cushion_s > 0.0)) report.push_back({"cushion must be positive", {}, {}});
  if (!(spec.upper_flat_start_s() <= spec.buffer_max_s)) {
    report.push_back({"cushion extends past buffer capacity", {}, {}});
  }
  if (!(spec.floor < spec.ceiling)) {
    report.push_back({"map floor must be below its ceiling", {}, {}});
  }
  return report;
}

MapSpec make_rate_map(const VideoManifest& manifest, const SessionConfig& cfg,
                      double reservoir_s) {
  return make_map(MapKind::kRateMap, manifest.min_rate_kbps(),
                  manifest.max_rate_kbps(), cfg, reservoir_s);
}

MapSpec make_chunk_map(const VideoManifest& manifest, const SessionConfig& cfg,
                       double reservoir_s) {
  return make_map(MapKind::kChunkMap,
                  manifest.chunk_duration_s * manifest.min_rate_kbps(),
                  manifest.mean_chunk_kbit(manifest.rate_count() - 1), cfg,
                  reservoir_s);
}

double eval_map(const MapSpec& spec, double buffer_s) {
  if (!(buffer_s >= 0.0) || !(buffer_s <= spec.buffer_max_s)) {
    throw std::out_of_range("eval_map: buffer outside [0, B_max]");
  }
  if (buffer_s <= spec.reservoir_s) return spec.floor;
  if (buffer_s >= spec.upper_flat_start_s()) return spec.ceiling;
  const double frac = (buffer_s - spec.reservoir_s) / spec.cushion_s;
  return spec.floor + (spec.ceiling - spec.floor) * frac;
}

double compute_reservoir(const VideoManifest& manifest,
                         std::size_t playhead_chunk, double horizon_s,
                         ReservoirBounds bounds, ReservoirMode mode) {
  const double v = manifest.chunk_duration_s;
  const double r_min = manifest.min_rate_kbps();
  const std::size_t n = manifest.chunk_count();
  const auto window = static_cast<std::size_t>(std::ceil(horizon_s / v));
  const std::size_t end = std::min(n, playhead_chunk + window);

  double running = 0.0;
  double worst = 0.0;
  for (std::size_t k = playhead_chunk; k < end; ++k) {
    running += manifest.chunk_kbit(0, k) / r_min - v;
    worst = std::max(worst, running);
  }
  const double raw =
      mode == ReservoirMode::kMaxPrefixDeficit ? worst : std::max(running, 0.0);
  return std::clamp(raw, bounds.min_s, bounds.max_s);
}

double compute_reservoir(const VideoManifest& manifest,
                         std::size_t playhead_chunk, const SessionConfig& cfg) {
  return compute_reservoir(manifest, playhead_chunk, cfg.reservoir_horizon_s,
                           {cfg.reservoir_min_s, cfg.reservoir_max_s},
                           cfg.reservoir_mode);
}

double accrue_outage_protection(const SessionState& state,
                                const SessionConfig& cfg,
                                bool buffer_increasing) {
  const auto& p = cfg.outage_protection;
  double credit = state.outage_protection_s;
  if (p.enabled && buffer_increasing && !state.in_startup_phase &&
      state.buffer_s < p.fill_fraction_gate * cfg.buffer_capacity_s) {
    credit += p.per_chunk_s;
  }
  return std::min(credit, std::max(p.cap_s, state.outage_protection_s));
}

MapSpec effective_map(const MapSpec& base, double reservoir_now,
                      double protection_s, bool monotone,
                      double previous_shift_s) {
  MapSpec out = base;
  double shift = reservoir_now + protection_s;
  if (monotone) shift = std::max(shift, previous_shift_s);
  shift = std::min(shift, base.buffer_max_s - kMinCushionS);
  out.reservoir_s = shift;
  out.cushion_s = std::min(base.cushion_s, base.buffer_max_s - shift);
  return out;
}

}  // namespace abrlab
