#include "abrlab/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "abrlab/metrics.hpp"
#include "abrlab/traces_io.hpp"
#include "json.hpp"

namespace abrlab {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;
constexpr int kLogSchemaVersion = 1;

// ABRLAB_LOG=info|debug prints progress to stderr. Artifacts never see it.
int log_level() {
  const char* v = std::getenv("ABRLAB_LOG");
  if (!v) return 0;
  const std::string s(v);
  if (s == "debug") return 2;
  if (s == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "abrlab: " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "abrlab: " << msg << "\n";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void check_valid(const VideoManifest& manifest, const CapacityTrace& trace,
                 const SessionConfig& cfg) {
  std::string msg;
  for (const auto& issue : validate_config(cfg, manifest.chunk_duration_s)) {
    msg += " " + issue.describe() + ";";
  }
  if (!msg.empty()) throw InvalidInput("invalid config:" + msg);
  for (const auto& issue : validate_trace(trace)) {
    msg += " " + issue.describe() + ";";
  }
  if (!msg.empty()) throw InvalidInput("invalid trace:" + msg);
}

std::vector<double> parse_rate_list(const std::string& text) {
  std::vector<double> rates;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      rates.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InvalidInput("bad rate `" + item + "` in --rates");
    }
  }
  if (rates.empty()) throw InvalidInput("--rates is empty");
  return rates;
}

std::pair<double, double> parse_outage_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw InvalidInput("--outage expects START:LENGTH");
  }
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw InvalidInput("--outage expects START:LENGTH");
  }
}

struct RunFlags {
  std::string manifest;
  std::string trace;
  std::optional<std::string> abr;
  std::optional<std::string> config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunFlags& f) {
  SessionConfig cfg;
  if (f.config) cfg = load_session_config(*f.config);
  if (f.abr) cfg.abr_algorithm = parse_abr_name(*f.abr);
  if (f.seed) cfg.rng_seed = *f.seed;

  const VideoManifest manifest = load_manifest(f.manifest);
  const CapacityTrace trace = load_capacity_trace(f.trace);
  check_valid(manifest, trace, cfg);
  log_info("run " + std::string(abr_name(cfg.abr_algorithm)) + " on " +
           manifest.title_id);

  const SessionLog log =
      simulate_session(manifest, trace, cfg.abr_algorithm, cfg);
  const fs::path out(f.out);
  ensure_dir(out);
  write_text_file(out / "session.log.json", session_log_to_json(log, cfg.rng_seed));
  write_text_file(out / "timeseries.csv",
                  timeseries_to_csv(sample_timeseries(log, manifest)));
  write_text_file(out / "metrics.json",
                  metrics_to_json(compute_metrics(log, manifest)));
  log_info("wrote artifacts to " + out.string());
  return kExitOk;
}

struct BatchFlags {
  std::string matrix;
  std::string out = ".";
  std::size_t jobs = 1;
};

int cmd_batch(const BatchFlags& f) {
  const ExperimentMatrix matrix = load_experiment_matrix(f.matrix);
  log_info("batch of " + std::to_string(matrix.cells.size()) + " cells, " +
           std::to_string(f.jobs) + " jobs");
  const auto outcomes = run_batch(matrix.cells, f.jobs);

  const fs::path out(f.out);
  const fs::path cells_dir = out / "cells";
  ensure_dir(cells_dir);

  std::vector<SummaryInput> inputs;
  ordered_json errors = ordered_json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const auto& cell = matrix.cells[i];
    if (!o.ok()) {
      log_info("cell " + o.id + " failed: " + o.error);
      errors.push_back(ordered_json{{"id", o.id}, {"error", o.error}});
      continue;
    }
    log_debug("cell " + o.id + " ok");
    write_text_file(cells_dir / (o.id + ".log.json"),
                    session_log_to_json(*o.log, cell.config.rng_seed));
    write_text_file(cells_dir / (o.id + ".metrics.json"),
                    metrics_to_json(compute_metrics(*o.log, *cell.manifest)));
    inputs.push_back({&*o.log, cell.manifest.get()});
  }
  write_text_file(out / "errors.json", errors.dump(2) + "\n");

  const SummaryTable table = aggregate_and_normalize(inputs, matrix.control);
  write_text_file(out / "summary.csv", summary_to_csv(table));
  write_text_file(out / "summary.json", summary_to_json(table));
  log_info("wrote summary to " + out.string());
  return kExitOk;
}

struct GenManifestFlags {
  std::string rates = "235,375,560,750,1050,1750,2350,3000";
  std::size_t chunks = 450;
  double chunk_duration_s = 4.0;
  double dispersion = 0.0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen_manifest(const GenManifestFlags& f) {
  const auto rates = parse_rate_list(f.rates);
  save_manifest(generate_vbr_manifest(rates, f.chunks, f.chunk_duration_s,
                                      f.dispersion, f.seed),
                f.out);
  return kExitOk;
}

struct GenTraceFlags {
  std::optional<std::string> outage;
  bool piecewise = false;
  double base_kbps = 3000.0;
  double duration_s = 1800.0;
  PiecewiseTraceParams params;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen_trace(const GenTraceFlags& f) {
  if (f.outage && f.piecewise) {
    throw InvalidInput("--outage and --piecewise are exclusive");
  }
  CapacityTrace trace;
  if (f.outage) {
    const auto [start, len] = parse_outage_spec(*f.outage);
    trace = generate_outage_trace(f.base_kbps, start, len, f.duration_s);
  } else if (f.piecewise) {
    PiecewiseTraceParams p = f.params;
    p.duration_s = f.duration_s;
    trace = generate_piecewise_trace(p, f.seed);
  } else {
    trace = CapacityTrace::constant(f.base_kbps, f.duration_s);
  }
  save_capacity_trace(trace, f.out);
  return kExitOk;
}

}  // namespace

std::string session_log_to_json(const SessionLog& log, std::uint64_t seed) {
  ordered_json head;
  head["schema"] = "abrlab-session-log";
  head["schema_version"] = kLogSchemaVersion;
  head["title_id"] = log.title_id;
  head["algorithm"] = log.algorithm;
  head["seed"] = seed;
  head["window_tag"] =
      log.window_tag ? ordered_json(*log.window_tag) : ordered_json(nullptr);
  head["truncated"] = log.truncated;
  const auto& s = log.final_state;
  head["final_state"] = ordered_json{
      {"buffer_s", s.buffer_s},
      {"next_chunk_index", s.next_chunk_index},
      {"current_rate_index", s.current_rate_index},
      {"clock_s", s.clock_s},
      {"playing", s.playing},
      {"reservoir_s", s.reservoir_s},
      {"outage_protection_s", s.outage_protection_s},
      {"in_startup_phase", s.in_startup_phase},
      {"played_s", s.played_s},
  };

  // One event per line keeps long logs diffable.
  std::string text = head.dump(2);
  text.pop_back();  // closing brace
  text += ",\n  \"events\": [";
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const auto& e = log.events[i];
    ordered_json ev{{"time_s", e.time_s},
                    {"kind", std::string(event_kind_name(e.kind))},
                    {"rate_index", e.rate_index},
                    {"chunk_index", e.chunk_index},
                    {"buffer_s", e.buffer_s}};
    text += i ? ",\n    " : "\n    ";
    text += ev.dump();
  }
  text += log.events.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return text;
}

std::string timeseries_to_csv(const std::vector<TimeseriesRow>& rows) {
  std::string out = "time_s,buffer_s,rate_kbps\n";
  for (const auto& r : rows) {
    out += format_number(r.time_s) + "," + format_number(r.buffer_s) + "," +
           format_number(r.rate_kbps) + "\n";
  }
  return out;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Buffer-based adaptive streaming simulator"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Simulate one session");
  run_cmd->add_option("--manifest", run.manifest, "Manifest JSON")->required();
  run_cmd->add_option("--trace", run.trace, "Capacity trace CSV")->required();
  run_cmd->add_option("--abr", run.abr,
                      "rmin_always|ewma|bba0|bba1|bba2|bba_others");
  run_cmd->add_option("--config", run.config, "Session config YAML");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--seed", run.seed, "Seed recorded in the log");

  BatchFlags batch;
  auto* batch_cmd = app.add_subcommand("batch", "Run an experiment matrix");
  batch_cmd->add_option("--matrix", batch.matrix, "Matrix YAML")->required();
  batch_cmd->add_option("--out", batch.out, "Output directory");
  batch_cmd->add_option("--jobs", batch.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);

  auto* gen_cmd = app.add_subcommand("gen", "Generate fixture files");
  gen_cmd->require_subcommand(1);

  GenManifestFlags gm;
  auto* gm_cmd = gen_cmd->add_subcommand("manifest", "Synthetic manifest");
  gm_cmd->add_option("--rates", gm.rates, "Comma-separated kb/s ladder");
  gm_cmd->add_option("--chunks", gm.chunks, "Chunks per stream");
  gm_cmd->add_option("--chunk-duration", gm.chunk_duration_s, "Seconds");
  gm_cmd->add_option("--dispersion", gm.dispersion,
                     "Chunk-size coefficient of variation (0 = CBR)");
  gm_cmd->add_option("--seed", gm.seed);
  gm_cmd->add_option("--out", gm.out, "Output JSON")->required();

  GenTraceFlags gt;
  auto* gt_cmd = gen_cmd->add_subcommand("trace", "Synthetic capacity trace");
  gt_cmd->add_option("--outage", gt.outage, "START:LENGTH zero-capacity gap");
  gt_cmd->add_flag("--piecewise", gt.piecewise, "Random piecewise-constant");
  gt_cmd->add_option("--base", gt.base_kbps, "Capacity outside the outage");
  gt_cmd->add_option("--duration", gt.duration_s, "Trace length in seconds");
  gt_cmd->add_option("--min", gt.params.min_kbps);
  gt_cmd->add_option("--max", gt.params.max_kbps);
  gt_cmd->add_option("--mean-segment", gt.params.mean_segment_s);
  gt_cmd->add_option("--quantum", gt.params.time_quantum_s,
                     "Round breakpoint times to multiples of this");
  gt_cmd->add_option("--seed", gt.seed);
  gt_cmd->add_option("--out", gt.out, "Output CSV")->required();

  std::vector<const char*> argv{"abrlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*batch_cmd) return cmd_batch(batch);
    if (*gm_cmd) return cmd_gen_manifest(gm);
    if (*gt_cmd) return cmd_gen_trace(gt);
  } catch (const IoError& e) {
    std::cerr << "abrlab: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "abrlab: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace abrlab
