#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "abrlab/domain.hpp"
#include "abrlab/maps.hpp"

namespace abrlab {

struct DownloadRecord {
  std::size_t chunk_index = 0;
  std::size_t rate_index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double kbit = 0.0;

  double duration_s() const { return end_s - start_s; }
  double throughput_kbps() const { return kbit / duration_s(); }
};

// Everything a rate-selection policy may look at. The next chunk to fetch is
// state.next_chunk_index; previous rate is state.current_rate_index.
struct AbrDecisionContext {
  const SessionState& state;
  const VideoManifest& manifest;
  const MapSpec& map;
  std::optional<DownloadRecord> last_download;
  std::size_t lookahead_window_chunks = 8;
  // Maintained by the caller with update_throughput_ewma.
  std::optional<double> throughput_ewma_kbps;
  double ewma_safety = 0.85;
  bool pinned_map_ends = false;
};

struct AbrDecision {
  std::size_t rate_index = 0;
  // Startup flag to carry into the next decision (BBA-2 and BBA-Others).
  bool in_startup_phase = false;

  bool operator==(const AbrDecision&) const = default;
};

// Rate map form of the sticky switch rule. Rates ascending, f the map value.
std::size_t sticky_rate_choice(std::span<const double> rates_kbps,
                               std::size_t prev_index, double f_kbps,
                               bool pinned_ends = false);

// Chunk map form: next_chunk_kbit[i] is the size of the next chunk of
// stream i, f the chunk-map value. Steps up at most one level.
std::size_t sticky_chunk_choice(std::span<const double> next_chunk_kbit,
                                std::size_t prev_index, double f_kbit);

double update_throughput_ewma(std::optional<double> previous,
                              double sample_kbps, double history_weight);

std::size_t rmin_always(const AbrDecisionContext& ctx);
std::size_t throughput_ewma_baseline(const AbrDecisionContext& ctx);
std::size_t bba0_next_rate(const AbrDecisionContext& ctx);
std::size_t bba1_next_rate(const AbrDecisionContext& ctx);
AbrDecision bba2_next_rate(const AbrDecisionContext& ctx);
AbrDecision bba_others_next_rate(const AbrDecisionContext& ctx);

// Linear from 0.875 V at an empty buffer to 0.5 V once the cushion is full.
double bba2_startup_threshold_s(double chunk_duration_s, double buffer_s,
                                double cushion_full_s);

AbrDecision select_rate(AbrKind kind, const AbrDecisionContext& ctx);

}  // namespace abrlab
