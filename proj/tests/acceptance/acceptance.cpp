// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "abrlab/algorithms.hpp"
#include "abrlab/cli.hpp"
#include "abrlab/maps.hpp"
#include "abrlab/metrics.hpp"
#include "abrlab/simulator.hpp"
#include "abrlab/traces_io.hpp"

using namespace abrlab;
namespace fs = std::filesystem;

namespace {

const std::vector<double> kLadder{235, 375, 560, 750, 1050, 1750, 2350, 3000};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::size_t count_kind(const SessionLog& log, EventKind kind) {
  return static_cast<std::size_t>(std::count_if(
      log.events.begin(), log.events.end(),
      [kind](const SessionEvent& e) { return e.kind == kind; }));
}

std::vector<int> requested_rates(const SessionLog& log) {
  std::vector<int> out;
  for (const auto& e : log.events) {
    if (e.kind == EventKind::kDownloadStart) out.push_back(e.rate_index);
  }
  return out;
}

// 1. Zero rebuffers once the buffer has reached the reservoir, for capacity
// never below R_min.
Verdict no_unnecessary_rebuffer() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20140817);
  std::uniform_real_distribution<double> disp(0.0, 0.4);
  std::uniform_real_distribution<double> seg(5.0, 60.0);
  const SessionConfig cfg;
  const int instances = 240;
  int reached = 0, offending = 0;
  std::size_t late_stalls = 0;
  for (int i = 0; i < instances; ++i) {
    const auto m = generate_vbr_manifest(kLadder, 450, 4.0, disp(rng), rng());
    PiecewiseTraceParams p;
    p.min_kbps = kLadder.front();
    p.max_kbps = 6000;
    p.mean_segment_s = seg(rng);
    p.duration_s = 7200;
    const auto tr = generate_piecewise_trace(p, rng());
    const auto log = simulate_session(m, tr, AbrKind::kBba1, cfg);

    bool in_reservoir = false;
    std::size_t stalls = 0;
    for (const auto& e : log.events) {
      if (e.kind == EventKind::kDownloadEnd && !in_reservoir) {
        const auto next = static_cast<std::size_t>(e.chunk_index) + 1;
        if (next < m.chunk_count() &&
            e.buffer_s >= compute_reservoir(m, next, cfg)) {
          in_reservoir = true;
        }
      }
      if (in_reservoir && e.kind == EventKind::kRebufferStart) ++stalls;
    }
    reached += in_reservoir;
    late_stalls += stalls;
    offending += stalls > 0;
  }
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
  return {offending == 0 && secs < 30.0,
          fmt("%d instances, %d reached reservoir, %zu rebuffers after it "
              "(%d sessions), %.1f s",
              instances, reached, late_stalls, offending, secs)};
}

// 2. Chunk-weighted nominal rate converges to a constant capacity.
Verdict rate_matching() {
  const auto m = make_cbr_manifest({235, 500, 1500, 3000}, 1800, 4.0);
  const auto tr = CapacityTrace::constant(1000, INFINITY);
  bool pass = true;
  std::string detail;
  for (AbrKind kind : {AbrKind::kBba0, AbrKind::kBba1}) {
    const auto log = simulate_session(m, tr, kind, SessionConfig{});
    const double avg = *average_video_rate(log, m, 300.0);
    const double err = std::abs(avg - 1000.0) / 1000.0;
    pass = pass && err <= 0.05;
    detail += fmt("%s avg %.1f kb/s (%.2f%% off); ", abr_name(kind).data(), avg,
                  100 * err);
  }
  return {pass, detail + "tolerance 5%"};
}

// 3. Event simulator vs fixed-step integration at 1 ms.
Verdict oracle_equivalence() {
  const double dt = 1e-3;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int accepted = 0, rejected = 0;
  double worst = 0.0;
  SessionConfig cfg;
  cfg.buffer_capacity_s = 10000;  // keep the cap out of play
  while (accepted < 50) {
    const std::size_t rungs = 2 + rng() % 4;
    std::vector<double> rates{200 + 300 * u(rng)};
    while (rates.size() < rungs) rates.push_back(rates.back() * (1.3 + u(rng)));
    const auto m = make_cbr_manifest(rates, 40 + rng() % 30, 2.0 + 4 * std::floor(u(rng) * 2));
    std::vector<std::size_t> plan(m.chunk_count());
    for (auto& r : plan) r = rng() % rungs;

    // Breakpoints on a 0.5 s grid expressed in whole 1 ms steps, so the
    // integrator sees each change on exactly the step it happens.
    std::vector<CapacityPoint> pts;
    long step = 0;
    while (step * dt < 600.0) {
      pts.push_back({static_cast<double>(step) * dt,
                     rates.front() * 0.5 + rates.back() * 1.5 * u(rng)});
      step += 500 * (1 + static_cast<long>(rng() % 40));
    }
    const auto tr = CapacityTrace::from_points(pts, INFINITY);
    const FixedRatePolicy policy = [&plan](std::size_t k) { return plan[k]; };

    const auto log = simulate_session(m, tr, fixed_rate_selector(policy), cfg, "fixed");
    if (count_kind(log, EventKind::kRebufferStart) > 0) {
      ++rejected;
      continue;
    }
    const auto fluid = fluid_oracle(m, tr, policy, cfg, dt, 0.0);
    std::vector<double> sim;
    for (const auto& e : log.events) {
      if (e.kind == EventKind::kDownloadEnd) sim.push_back(e.buffer_s);
    }
    if (sim.size() != fluid.boundaries.size()) {
      return {false, fmt("boundary count mismatch %zu vs %zu", sim.size(),
                         fluid.boundaries.size())};
    }
    for (std::size_t k = 0; k < sim.size(); ++k) {
      worst = std::max(worst, std::abs(sim[k] - fluid.boundaries[k].buffer_s));
    }
    ++accepted;
  }
  return {worst <= 2 * dt,
          fmt("50 instances (%d rejected for stalls), max |dB| = %.3g s, "
              "tolerance %.3g s",
              rejected, worst, 2 * dt)};
}

// Straight transcription of the rate-map pseudocode, kept apart from the
// library on purpose.
std::size_t pseudocode_rate(const std::vector<double>& r, std::size_t prev, double f) {
  const std::size_t m = r.size();
  const double plus = prev == m - 1 ? r[m - 1] : r[prev + 1];
  const double minus = prev == 0 ? r[0] : r[prev - 1];
  if (f >= plus) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (r[i] < f) best = i;
    }
    return best;
  }
  if (f <= minus) {
    for (std::size_t i = 0; i < m; ++i) {
      if (r[i] > f) return i;
    }
    return m - 1;
  }
  return prev;
}

// 4. Sticky switch rule exhaustive sweep.
Verdict sticky_rule_fidelity() {
  const std::vector<double> r{235, 500, 1000};
  std::size_t checked = 0, mismatches = 0, stays = 0, ups = 0, downs = 0;
  for (std::size_t prev = 0; prev < r.size(); ++prev) {
    for (int f = 0; f <= 1500; ++f) {
      const auto got = sticky_rate_choice(r, prev, f);
      const auto want = pseudocode_rate(r, prev, f);
      ++checked;
      mismatches += got != want;
      (got == prev ? stays : got > prev ? ups : downs)++;
    }
  }
  const bool examples = sticky_rate_choice(r, 1, 700) == 1 &&
                        sticky_rate_choice(r, 1, 1100) == 2 &&
                        sticky_rate_choice(r, 1, 235) == 1;
  return {mismatches == 0 && examples,
          fmt("%zu (prev, f) pairs, %zu mismatches (stay %zu, up %zu, down %zu), "
              "worked examples %s",
              checked, mismatches, stays, ups, downs, examples ? "ok" : "WRONG")};
}

// 5. Reservoir clamps.
Verdict reservoir_clamps() {
  const double v = 4.0;
  auto with_big = [&](std::size_t big) {
    VideoManifest m = make_cbr_manifest({235, 1000}, 200, v);
    for (std::size_t k = 0; k < big; ++k) {
      for (std::size_t i = 0; i < 2; ++i) m.chunk_sizes_kbit[i][k] *= 2;
    }
    return compute_reservoir(m, 0, SessionConfig{});
  };
  const double cbr = with_big(0), fifty = with_big(50), ten = with_big(10);
  return {cbr == 8.0 && fifty == 140.0 && ten == 40.0,
          fmt("CBR %.17g s, fifty 2x chunks %.17g s, ten 2x chunks %.17g s", cbr,
              fifty, ten)};
}

// 6. BBA-2 startup ramp.
Verdict bba2_ramp() {
  const auto m = make_cbr_manifest(kLadder, 100, 4.0);
  const auto tr = CapacityTrace::constant(10 * kLadder.back(), INFINITY);
  const auto log = simulate_session(m, tr, AbrKind::kBba2, SessionConfig{});
  const auto rates = requested_rates(log);
  bool ramp = rates.size() >= kLadder.size();
  for (std::size_t k = 0; ramp && k < kLadder.size(); ++k) {
    ramp = rates[k] == static_cast<int>(k);
  }

  // Near a full cushion, a 1.9 s gain (below V/2) must not step up, while
  // 2.1 s does. Next chunks are 1.5x their stream mean so the chunk map
  // itself holds the rate.
  VideoManifest vm;
  vm.title_id = "ramp";
  vm.chunk_duration_s = 4.0;
  vm.rates_kbps = {235, 500, 1000, 1200};
  for (double r : vm.rates_kbps) {
    vm.chunk_sizes_kbit.push_back({4 * r, 6 * r, 2 * r});
  }
  SessionConfig cfg;
  const MapSpec map = make_chunk_map(vm, cfg, 8.0);
  auto decide = [&](double gain) {
    SessionState s;
    s.buffer_s = map.upper_flat_start_s();
    s.next_chunk_index = 1;
    s.current_rate_index = 1;
    s.in_startup_phase = true;
    const double chunk = vm.chunk_kbit(1, 0);
    const double capacity = chunk / (4.0 - gain);
    const DownloadRecord last{0, 1, 0.0, chunk / capacity, chunk};
    const AbrDecisionContext ctx{s, vm, map, last, 8, std::nullopt, 0.85, false};
    return bba2_next_rate(ctx);
  };
  const auto hold = decide(1.9);
  const auto step = decide(2.1);
  const bool threshold = hold.rate_index == 1 && hold.in_startup_phase &&
                         step.rate_index == 2;
  std::string seq;
  for (std::size_t k = 0; k < std::min<std::size_t>(rates.size(), 10); ++k) {
    seq += std::to_string(rates[k]) + (k + 1 < 10 ? "," : "");
  }
  return {ramp && threshold,
          fmt("ramp at 10x R_max: %s...; gain 1.9 s at cushion-full -> %zu, "
              "2.1 s -> %zu",
              seq.c_str(), hold.rate_index, step.rate_index)};
}

// 7. Outage protection survives a 25 s outage the unprotected run does not.
Verdict outage_protection() {
  const auto m = make_cbr_manifest(kLadder, 450, 4.0);
  const double base = 300.0;  // between R_1 and R_2
  SessionConfig on;
  SessionConfig off;
  off.outage_protection.enabled = false;

  for (double start = 600; start <= 1200; start += 1.0) {
    const auto tr = generate_outage_trace(base, start, 25.0, 7200.0);
    const auto unprotected = simulate_session(m, tr, AbrKind::kBba1, off);
    if (count_kind(unprotected, EventKind::kRebufferStart) == 0) continue;

    const auto protected_log = simulate_session(m, tr, AbrKind::kBba1, on);
    const auto before = simulate_session(
        m, CapacityTrace::constant(base, start), AbrKind::kBba1, on);
    const double credit = before.final_state.outage_protection_s;
    const auto stalls = count_kind(protected_log, EventKind::kRebufferStart);
    return {stalls == 0 && credit >= 25.0,
            fmt("outage at %.0f s: protection %.1f s, rebuffers with %zu / "
                "without %zu",
                start, credit, stalls,
                count_kind(unprotected, EventKind::kRebufferStart))};
  }
  return {false, "no outage placement in [600, 1200] s stalls the unprotected run"};
}

// 8. BBA-Others smooths up-switches without adding rebuffers.
Verdict switch_smoothing() {
  int fewer_ups = 0, rate_ok = 0, rebuffers_equal = 0;
  const int runs = 100;
  for (int seed = 1; seed <= runs; ++seed) {
    const auto m = generate_vbr_manifest(kLadder, 450, 4.0, 0.4, seed);
    const auto tr = CapacityTrace::constant(1000, INFINITY);
    const auto b1 = simulate_session(m, tr, AbrKind::kBba1, SessionConfig{});
    const auto bo = simulate_session(m, tr, AbrKind::kBbaOthers, SessionConfig{});
    fewer_ups += up_switch_count(bo) < up_switch_count(b1);
    rate_ok += *switch_rate(bo) <= *switch_rate(b1);
    rebuffers_equal += rebuffer_count(bo) == rebuffer_count(b1);
  }
  return {rate_ok == runs && fewer_ups >= 90 && rebuffers_equal == runs,
          fmt("%d/%d runs switch_rate <=, %d/%d strictly fewer up-switches "
              "(need 90), %d/%d equal rebuffer counts",
              rate_ok, runs, fewer_ups, runs, rebuffers_equal, runs)};
}

// 9. Directional comparison on a heterogeneous synthetic fleet.
Verdict fleet_comparison() {
  const int sessions = 500;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<VideoManifest> manifests;
  std::vector<CapacityTrace> traces;
  manifests.reserve(sessions);
  traces.reserve(sessions);
  for (int i = 0; i < sessions; ++i) {
    manifests.push_back(generate_vbr_manifest(kLadder, 450, 4.0, 0.4 * u(rng), rng()));
    switch (i % 3) {
      case 0: {  // sudden drop after a fast start
        const double drop = 10 + 290 * u(rng);
        const double high = 2000 + 4000 * u(rng);
        const double low = 250 + 300 * u(rng);
        traces.push_back(CapacityTrace::from_points({{0, high}, {drop, low}}, 7200));
        break;
      }
      case 1: {  // fluctuating capacity
        PiecewiseTraceParams p;
        p.min_kbps = 150;
        p.max_kbps = 6000;
        p.mean_segment_s = 10 + 50 * u(rng);
        p.duration_s = 7200;
        traces.push_back(generate_piecewise_trace(p, rng()));
        break;
      }
      default:  // short outage on an otherwise steady link
        traces.push_back(generate_outage_trace(500 + 4500 * u(rng), 30 + 1200 * u(rng),
                                               10 + 30 * u(rng), 7200));
        break;
    }
  }

  const std::vector<AbrKind> algos{AbrKind::kRminAlways, AbrKind::kBba1,
                                   AbrKind::kBba2, AbrKind::kEwma};
  std::vector<BatchCell> cells;
  for (AbrKind a : algos) {
    for (int i = 0; i < sessions; ++i) {
      BatchCell c;
      c.id = std::to_string(i);
      c.manifest = std::shared_ptr<const VideoManifest>(&manifests[i], [](auto*) {});
      c.trace = std::shared_ptr<const CapacityTrace>(&traces[i], [](auto*) {});
      c.algorithm = a;
      c.config.abr_algorithm = a;
      cells.push_back(std::move(c));
    }
  }
  const auto outcomes = run_batch(cells, 4);
  std::vector<SummaryInput> inputs;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok()) return {false, "cell failed: " + outcomes[i].error};
    inputs.push_back({&*outcomes[i].log, cells[i].manifest.get()});
  }
  const auto table = aggregate_and_normalize(inputs, "ewma");
  auto norm = [&](const char* a) {
    return table.find(a)->normalized_rebuffers.value_or(NAN);
  };
  auto rate = [&](const char* a) {
    return table.find(a)->average_video_rate_kbps.value_or(NAN);
  };
  const double rmin = norm("rmin_always"), b1 = norm("bba1"), b2 = norm("bba2"),
               ew = norm("ewma");
  const bool order = rmin <= b1 && b1 < ew;
  const bool b2_rate = rate("bba2") > rate("bba1");
  const bool b2_between = b1 <= b2 && b2 <= ew;
  return {order && b2_rate && b2_between,
          fmt("normalized rebuffers rmin %.3f, bba1 %.3f, bba2 %.3f, ewma %.3f; "
              "avg rate bba1 %.0f, bba2 %.0f, ewma %.0f kb/s",
              rmin, b1, b2, ew, rate("bba1"), rate("bba2"), rate("ewma"))};
}

// 10. CLI artifacts are byte-identical across repeated invocations.
Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "abrlab_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_manifest(generate_vbr_manifest(kLadder, 150, 4.0, 0.4, 3), dir / "m.json");
  PiecewiseTraceParams p;
  p.duration_s = 3000;
  save_capacity_trace(generate_piecewise_trace(p, 4), dir / "t.csv");
  write_text_file(dir / "matrix.yaml",
                  "control: ewma\n"
                  "algorithms: [ewma, bba1, bba2, bba_others]\n"
                  "seeds: [1, 2, 3]\n"
                  "manifests:\n"
                  "  - {name: file, path: m.json}\n"
                  "  - {name: gen, generate: {rates_kbps: [235, 750, 1750, 3000], chunks: 150, dispersion: 0.3}}\n"
                  "traces:\n"
                  "  - {name: file, path: t.csv, window: peak}\n"
                  "  - {name: pw, piecewise: {min_kbps: 150, duration_s: 3000}}\n");

  std::vector<std::vector<std::string>> invocations;
  for (const char* abr : {"bba0", "bba1", "bba2", "bba_others", "ewma", "rmin_always"}) {
    for (const char* tag : {"a", "b"}) {
      invocations.push_back({"run", "--manifest", (dir / "m.json").string(), "--trace",
                             (dir / "t.csv").string(), "--abr", abr, "--out",
                             (dir / "run" / tag / abr).string()});
    }
  }
  for (const char* tag : {"a", "b"}) {
    invocations.push_back({"batch", "--matrix", (dir / "matrix.yaml").string(),
                           "--out", (dir / "batch" / tag).string(), "--jobs",
                           tag[0] == 'a' ? "1" : "4"});
  }
  for (const auto& args : invocations) {
    if (run_cli(args) != 0) return {false, "invocation failed: " + args[0]};
  }

  std::size_t compared = 0, differing = 0;
  for (const char* root : {"run", "batch"}) {
    const fs::path a = dir / root / "a";
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (!entry.is_regular_file()) continue;
      const fs::path other = dir / root / "b" / fs::relative(entry.path(), a);
      ++compared;
      if (!fs::exists(other) ||
          read_text_file(entry.path()) != read_text_file(other)) {
        ++differing;
      }
    }
  }
  fs::remove_all(dir);
  return {differing == 0 && compared > 0,
          fmt("%zu artifact files compared, %zu differ", compared, differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"1 no-unnecessary-rebuffer", no_unnecessary_rebuffer},
      {"2 rate-matching", rate_matching},
      {"3 oracle-equivalence", oracle_equivalence},
      {"4 sticky-rule-fidelity", sticky_rule_fidelity},
      {"5 reservoir-clamps", reservoir_clamps},
      {"6 bba2-ramp", bba2_ramp},
      {"7 outage-protection", outage_protection},
      {"8 switch-smoothing", switch_smoothing},
      {"9 fleet-comparison", fleet_comparison},
      {"10 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s criterion %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
