#include <algorithm>
#include <cmath>
#include <limits>

#include "abrlab/simulator.hpp"

namespace abrlab {

FluidSeries fluid_oracle(const VideoManifest& manifest,
                         const CapacityTrace& trace,
                         const FixedRatePolicy& policy,
                         const SessionConfig& cfg, double dt_s,
                         double sample_every_s) {
  FluidSeries out;
  const double v = manifest.chunk_duration_s;
  const std::size_t n = manifest.chunk_count();
  const double resume = cfg.resume_threshold(v);

  double buffer = cfg.initial_buffer_s;
  bool playing = buffer > 0.0;
  bool started = playing;
  bool stalled = false;
  std::size_t k = 0;
  double rate = manifest.rates_kbps[policy(0)];
  double fetched_kbit = 0.0;
  double next_sample = 0.0;

  for (std::size_t step = 0; k < n; ++step) {
    const double t = static_cast<double>(step) * dt_s;
    if (std::isfinite(trace.duration_s) && t >= trace.duration_s) break;
    if (sample_every_s > 0.0 && t >= next_sample) {
      out.samples.push_back({t, buffer});
      next_sample += sample_every_s;
    }

    // Capacity is sampled once per step.
    const double c = buffer >= cfg.buffer_capacity_s ? 0.0 : trace.capacity_at(t);
    double left = dt_s;
    while (left > 0.0 && k < n) {
      const double need = v * rate - fetched_kbit;
      const double to_finish =
          c > 0.0 ? need / c : std::numeric_limits<double>::infinity();
      const double h = std::min(to_finish, left);
      buffer += c / rate * h;
      fetched_kbit += c * h;
      if (playing) {
        buffer -= h;
        if (buffer <= 0.0) {
          buffer = 0.0;
          playing = false;
          stalled = true;
          ++out.rebuffers;
        }
      }
      left -= h;
      if (to_finish > h) break;

      out.boundaries.push_back({k, t + (dt_s - left), buffer});
      ++k;
      fetched_kbit = 0.0;
      if (!started) {
        started = true;
        playing = true;
      } else if (stalled && buffer >= resume) {
        stalled = false;
        playing = true;
      }
      if (k < n) rate = manifest.rates_kbps[policy(k)];
    }
  }
  return out;
}

}  // namespace abrlab
