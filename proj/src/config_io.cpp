#include <algorithm>
#include <set>
#include <string>

#include <yaml-cpp/yaml.h>

#include "abrlab/cli.hpp"
#include "abrlab/traces_io.hpp"

namespace abrlab {

namespace {

void reject_unknown(const YAML::Node& node, const std::set<std::string>& known,
                    const std::string& where) {
  if (!node.IsMap()) throw InvalidInput(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!known.contains(key)) {
      throw InvalidInput("unknown key `" + key + "` in " + where);
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw InvalidInput("bad value for `" + key + "`");
  }
}

template <typename T>
void read_if(const YAML::Node& map, const std::string& key, T& out) {
  if (const auto n = map[key]) out = scalar<T>(n, key);
}

AbrKind parse_abr_or_throw(const std::string& name) {
  if (auto kind = parse_abr_kind(name)) return *kind;
  std::string valid;
  for (const auto& n : abr_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw InvalidInput("unknown algorithm `" + name + "` (valid: " + valid + ")");
}

YAML::Node parse_yaml(std::string_view text, const std::string& what) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

}  // namespace

AbrKind parse_abr_name(const std::string& name) {
  return parse_abr_or_throw(name);
}

static void apply_config_node(const YAML::Node& node, SessionConfig& cfg) {
  if (!node || node.IsNull()) return;
  reject_unknown(node,
                 {"buffer_capacity_s", "startup_policy", "abr",
                  "resume_threshold_s", "seed", "reservoir_min_s",
                  "reservoir_max_s", "reservoir_horizon_s", "reservoir_mode",
                  "bba0_reservoir_s", "map_knee_fraction",
                  "pinned_map_ends", "outage_protection",
                  "lookahead_window_chunks", "ewma_history_weight",
                  "ewma_safety", "initial_buffer_s"},
                 "config");
  read_if(node, "buffer_capacity_s", cfg.buffer_capacity_s);
  if (const auto n = node["startup_policy"]) {
    const auto v = scalar<std::string>(n, "startup_policy");
    if (v == "first_chunk") {
      cfg.startup_policy = StartupPolicy::kFirstChunk;
    } else if (v == "resume_threshold") {
      cfg.startup_policy = StartupPolicy::kResumeThreshold;
    } else {
      throw InvalidInput("startup_policy must be first_chunk or resume_threshold");
    }
  }
  if (const auto n = node["abr"]) {
    cfg.abr_algorithm = parse_abr_or_throw(scalar<std::string>(n, "abr"));
  }
  if (const auto n = node["resume_threshold_s"]) {
    cfg.resume_threshold_s = scalar<double>(n, "resume_threshold_s");
  }
  read_if(node, "seed", cfg.rng_seed);
  read_if(node, "reservoir_min_s", cfg.reservoir_min_s);
  read_if(node, "reservoir_max_s", cfg.reservoir_max_s);
  read_if(node, "reservoir_horizon_s", cfg.reservoir_horizon_s);
  if (const auto n = node["reservoir_mode"]) {
    const auto v = scalar<std::string>(n, "reservoir_mode");
    if (v == "max_prefix_deficit") {
      cfg.reservoir_mode = ReservoirMode::kMaxPrefixDeficit;
    } else if (v == "net_sum") {
      cfg.reservoir_mode = ReservoirMode::kNetSum;
    } else {
      throw InvalidInput("reservoir_mode must be max_prefix_deficit or net_sum");
    }
  }
  read_if(node, "bba0_reservoir_s", cfg.bba0_reservoir_s);
  read_if(node, "map_knee_fraction", cfg.map_knee_fraction);
  read_if(node, "pinned_map_ends", cfg.pinned_map_ends);
  if (const auto op = node["outage_protection"]) {
    reject_unknown(op, {"enabled", "per_chunk_s", "fill_fraction_gate", "cap_s"},
                   "outage_protection");
    read_if(op, "enabled", cfg.outage_protection.enabled);
    read_if(op, "per_chunk_s", cfg.outage_protection.per_chunk_s);
    read_if(op, "fill_fraction_gate", cfg.outage_protection.fill_fraction_gate);
    read_if(op, "cap_s", cfg.outage_protection.cap_s);
  }
  read_if(node, "lookahead_window_chunks", cfg.lookahead_window_chunks);
  read_if(node, "ewma_history_weight", cfg.ewma_history_weight);
  read_if(node, "ewma_safety", cfg.ewma_safety);
  read_if(node, "initial_buffer_s", cfg.initial_buffer_s);
}

SessionConfig parse_session_config(std::string_view yaml_text,
                                   SessionConfig base) {
  apply_config_node(parse_yaml(yaml_text, "config"), base);
  return base;
}

SessionConfig load_session_config(const std::filesystem::path& path,
                                  SessionConfig base) {
  return parse_session_config(read_text_file(path), base);
}

namespace {

std::vector<double> double_list(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) throw InvalidInput("`" + key + "` must be a list");
  return scalar<std::vector<double>>(n, key);
}

std::shared_ptr<const VideoManifest> manifest_entry(
    const YAML::Node& entry, const std::filesystem::path& dir,
    std::uint64_t seed) {
  if (const auto p = entry["path"]) {
    return std::make_shared<VideoManifest>(
        load_manifest(dir / scalar<std::string>(p, "path")));
  }
  if (const auto g = entry["generate"]) {
    reject_unknown(g, {"rates_kbps", "chunks", "chunk_duration_s", "dispersion"},
                   "manifest generate");
    if (!g["rates_kbps"]) throw InvalidInput("generate needs rates_kbps");
    const auto rates = double_list(g["rates_kbps"], "rates_kbps");
    std::size_t chunks = 450;
    double v = 4.0;
    double dispersion = 0.0;
    read_if(g, "chunks", chunks);
    read_if(g, "chunk_duration_s", v);
    read_if(g, "dispersion", dispersion);
    return std::make_shared<VideoManifest>(
        generate_vbr_manifest(rates, chunks, v, dispersion, seed));
  }
  throw InvalidInput("manifest entry needs `path` or `generate`");
}

std::shared_ptr<const CapacityTrace> trace_entry(
    const YAML::Node& entry, const std::filesystem::path& dir,
    std::uint64_t seed) {
  if (const auto p = entry["path"]) {
    return std::make_shared<CapacityTrace>(
        load_capacity_trace(dir / scalar<std::string>(p, "path")));
  }
  if (const auto g = entry["piecewise"]) {
    reject_unknown(g,
                   {"min_kbps", "max_kbps", "mean_segment_s", "duration_s",
                    "time_quantum_s"},
                   "piecewise trace");
    PiecewiseTraceParams params;
    read_if(g, "min_kbps", params.min_kbps);
    read_if(g, "max_kbps", params.max_kbps);
    read_if(g, "mean_segment_s", params.mean_segment_s);
    read_if(g, "duration_s", params.duration_s);
    read_if(g, "time_quantum_s", params.time_quantum_s);
    return std::make_shared<CapacityTrace>(generate_piecewise_trace(params, seed));
  }
  if (const auto g = entry["outage"]) {
    reject_unknown(g, {"base_kbps", "start_s", "length_s", "duration_s"},
                   "outage trace");
    double base = 3000.0, start = 600.0, len = 25.0, duration = 1800.0;
    read_if(g, "base_kbps", base);
    read_if(g, "start_s", start);
    read_if(g, "length_s", len);
    read_if(g, "duration_s", duration);
    return std::make_shared<CapacityTrace>(
        generate_outage_trace(base, start, len, duration));
  }
  if (const auto c = entry["constant_kbps"]) {
    double duration = 1800.0;
    read_if(entry, "duration_s", duration);
    return std::make_shared<CapacityTrace>(
        CapacityTrace::constant(scalar<double>(c, "constant_kbps"), duration));
  }
  throw InvalidInput(
      "trace entry needs `path`, `piecewise`, `outage` or `constant_kbps`");
}

std::string entry_name(const YAML::Node& entry, std::size_t index,
                       const std::string& prefix) {
  if (const auto n = entry["name"]) return scalar<std::string>(n, "name");
  return prefix + std::to_string(index);
}

}  // namespace

ExperimentMatrix load_experiment_matrix(const std::filesystem::path& path) {
  const YAML::Node doc = parse_yaml(read_text_file(path), "matrix");
  reject_unknown(doc,
                 {"control", "algorithms", "seeds", "config", "manifests",
                  "traces"},
                 "matrix");
  const auto dir = path.parent_path();

  ExperimentMatrix m;
  if (!doc["control"]) throw InvalidInput("matrix needs a `control` algorithm");
  m.control = scalar<std::string>(doc["control"], "control");
  parse_abr_or_throw(m.control);

  if (!doc["algorithms"] || !doc["algorithms"].IsSequence()) {
    throw InvalidInput("matrix needs an `algorithms` list");
  }
  for (const auto& a : doc["algorithms"]) {
    m.algorithms.push_back(parse_abr_or_throw(scalar<std::string>(a, "algorithms")));
  }
  const bool has_control =
      std::any_of(m.algorithms.begin(), m.algorithms.end(),
                  [&](AbrKind k) { return abr_name(k) == m.control; });
  if (!has_control) {
    throw InvalidInput("control `" + m.control + "` is not among the algorithms");
  }
  if (const auto s = doc["seeds"]) {
    m.seeds = scalar<std::vector<std::uint64_t>>(s, "seeds");
    if (m.seeds.empty()) throw InvalidInput("`seeds` must not be empty");
  }
  apply_config_node(doc["config"], m.config);

  const auto manifests = doc["manifests"];
  const auto traces = doc["traces"];
  if (!manifests || !manifests.IsSequence() || manifests.size() == 0) {
    throw InvalidInput("matrix needs a non-empty `manifests` list");
  }
  if (!traces || !traces.IsSequence() || traces.size() == 0) {
    throw InvalidInput("matrix needs a non-empty `traces` list");
  }

  for (const auto seed : m.seeds) {
    SessionConfig cfg = m.config;
    cfg.rng_seed = seed;

    std::vector<NamedManifest> named_manifests;
    std::vector<std::optional<std::string>> manifest_errors;
    for (std::size_t i = 0; i < manifests.size(); ++i) {
      const auto e = manifests[i];
      NamedManifest nm{entry_name(e, i, "manifest"), nullptr};
      std::optional<std::string> err;
      try {
        nm.manifest = manifest_entry(e, dir, seed);
      } catch (const std::exception& ex) {
        err = ex.what();
      }
      named_manifests.push_back(std::move(nm));
      manifest_errors.push_back(std::move(err));
    }
    std::vector<NamedTrace> named_traces;
    std::vector<std::optional<std::string>> trace_errors;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto e = traces[i];
      NamedTrace nt{entry_name(e, i, "trace"), nullptr, std::nullopt};
      if (const auto w = e["window"]) nt.window_tag = scalar<std::string>(w, "window");
      std::optional<std::string> err;
      try {
        nt.trace = trace_entry(e, dir, seed);
      } catch (const std::exception& ex) {
        err = ex.what();
      }
      named_traces.push_back(std::move(nt));
      trace_errors.push_back(std::move(err));
    }

    auto cells = expand_matrix(m.algorithms, named_manifests, named_traces, cfg);
    // expand_matrix orders cells algorithm-major, then manifest, then trace.
    const std::size_t nm = named_manifests.size();
    const std::size_t nt = named_traces.size();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::size_t mi = (c / nt) % nm;
      const std::size_t ti = c % nt;
      if (manifest_errors[mi]) {
        cells[c].setup_error = "manifest `" + named_manifests[mi].name +
                               "`: " + *manifest_errors[mi];
      } else if (trace_errors[ti]) {
        cells[c].setup_error =
            "trace `" + named_traces[ti].name + "`: " + *trace_errors[ti];
      }
      cells[c].id += "__s" + std::to_string(seed);
      m.cells.push_back(std::move(cells[c]));
    }
  }
  return m;
}

}  // namespace abrlab
