#include "abrlab/algorithms.hpp"

#include <algorithm>
#include <vector>

namespace abrlab {

namespace {

std::vector<double> next_chunk_sizes(const AbrDecisionContext& ctx) {
  const auto& m = ctx.manifest;
  const std::size_t k =
      std::min(ctx.state.next_chunk_index, m.chunk_count() - 1);
  std::vector<double> sizes(m.rate_count());
  for (std::size_t i = 0; i < sizes.size(); ++i) sizes[i] = m.chunk_kbit(i, k);
  return sizes;
}

double map_value(const AbrDecisionContext& ctx) {
  return eval_map(ctx.map, std::clamp(ctx.state.buffer_s, 0.0,
                                      ctx.map.buffer_max_s));
}

}  // namespace

std::size_t sticky_rate_choice(std::span<const double> rates,
                               std::size_t prev, double f, bool pinned_ends) {
  const std::size_t top = rates.size() - 1;
  const std::size_t plus = prev == top ? top : prev + 1;
  const std::size_t minus = prev == 0 ? 0 : prev - 1;

  if (f >= rates[plus]) {
    if (pinned_ends && f >= rates[top]) return top;
    // max{R_i : R_i < f}
    std::size_t next = 0;
    for (std::size_t i = 0; i <= top; ++i) {
      if (rates[i] < f) next = i;
    }
    return next;
  }
  if (f <= rates[minus]) {
    if (pinned_ends && f <= rates[0]) return 0;
    // min{R_i : R_i > f}
    for (std::size_t i = 0; i <= top; ++i) {
      if (rates[i] > f) return i;
    }
    return top;
  }
  return prev;
}

std::size_t sticky_chunk_choice(std::span<const double> next_chunk_kbit,
                                std::size_t prev, double f) {
  const std::size_t top = next_chunk_kbit.size() - 1;
  const std::size_t plus = prev == top ? top : prev + 1;
  const std::size_t minus = prev == 0 ? 0 : prev - 1;

  if (f >= next_chunk_kbit[plus]) return plus;
  if (f <= next_chunk_kbit[minus]) {
    // max{R_i : ChunkMap[R_i] < f}, or R_min when no chunk fits.
    std::size_t next = 0;
    for (std::size_t i = 0; i <= top; ++i) {
      if (next_chunk_kbit[i] < f) next = i;
    }
    return next;
  }
  return prev;
}

double update_throughput_ewma(std::optional<double> previous,
                              double sample_kbps, double history_weight) {
  if (!previous) return sample_kbps;
  return history_weight * *previous + (1.0 - history_weight) * sample_kbps;
}

std::size_t rmin_always(const AbrDecisionContext&) { return 0; }

std::size_t throughput_ewma_baseline(const AbrDecisionContext& ctx) {
  if (!ctx.throughput_ewma_kbps) return 0;
  const double budget = ctx.ewma_safety * *ctx.throughput_ewma_kbps;
  const auto& rates = ctx.manifest.rates_kbps;
  std::size_t choice = 0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] <= budget) choice = i;
  }
  return choice;
}

std::size_t bba0_next_rate(const AbrDecisionContext& ctx) {
  return sticky_rate_choice(ctx.manifest.rates_kbps,
                            ctx.state.current_rate_index, map_value(ctx),
                            ctx.pinned_map_ends);
}

std::size_t bba1_next_rate(const AbrDecisionContext& ctx) {
  const auto sizes = next_chunk_sizes(ctx);
  return sticky_chunk_choice(sizes, ctx.state.current_rate_index,
                             map_value(ctx));
}

double bba2_startup_threshold_s(double v, double buffer_s,
                                double cushion_full_s) {
  const double frac =
      cushion_full_s > 0.0 ? std::clamp(buffer_s / cushion_full_s, 0.0, 1.0)
                           : 1.0;
  return 0.875 * v - 0.375 * v * frac;
}

AbrDecision bba2_next_rate(const AbrDecisionContext& ctx) {
  const std::size_t prev = ctx.state.current_rate_index;
  if (!ctx.state.in_startup_phase) return {bba1_next_rate(ctx), false};
  if (!ctx.last_download) return {prev, true};

  const double v = ctx.manifest.chunk_duration_s;
  const double gain = v - ctx.last_download->duration_s();
  const std::size_t steady = bba1_next_rate(ctx);
  if (gain < 0.0 || steady > prev) return {steady, false};

  const double threshold = bba2_startup_threshold_s(
      v, ctx.state.buffer_s, ctx.map.upper_flat_start_s());
  if (gain > threshold) {
    return {std::min(prev + 1, ctx.manifest.rate_count() - 1), true};
  }
  return {prev, true};
}

AbrDecision bba_others_next_rate(const AbrDecisionContext& ctx) {
  AbrDecision decision = bba2_next_rate(ctx);
  const std::size_t prev = ctx.state.current_rate_index;
  if (decision.rate_index <= prev) return decision;

  const double f = map_value(ctx);
  const auto& m = ctx.manifest;
  const std::size_t first = ctx.state.next_chunk_index;
  const std::size_t last =
      std::min(m.chunk_count(), first + ctx.lookahead_window_chunks);
  for (std::size_t k = first; k < last; ++k) {
    if (m.chunk_kbit(decision.rate_index, k) > f) {
      decision.rate_index = prev;
      break;
    }
  }
  return decision;
}

AbrDecision select_rate(AbrKind kind, const AbrDecisionContext& ctx) {
  switch (kind) {
    case AbrKind::kRminAlways:
      return {rmin_always(ctx), false};
    case AbrKind::kEwma:
      return {throughput_ewma_baseline(ctx), false};
    case AbrKind::kBba0:
      return {bba0_next_rate(ctx), false};
    case AbrKind::kBba1:
      return {bba1_next_rate(ctx), false};
    case AbrKind::kBba2:
      return bba2_next_rate(ctx);
    case AbrKind::kBbaOthers:
      return bba_others_next_rate(ctx);
  }
  return {0, false};
}

}  // namespace abrlab
