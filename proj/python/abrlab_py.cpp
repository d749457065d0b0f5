#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "abrlab/algorithms.hpp"
#include "abrlab/cli.hpp"
#include "abrlab/maps.hpp"
#include "abrlab/metrics.hpp"
#include "abrlab/simulator.hpp"
#include "abrlab/traces_io.hpp"

namespace py = pybind11;
using namespace abrlab;

namespace {

SessionConfig config_from(const std::optional<std::string>& yaml_text) {
  return yaml_text ? parse_session_config(*yaml_text) : SessionConfig{};
}

py::dict metrics_dict(const SessionMetrics& m) {
  py::dict d;
  d["rebuffers_per_playhour"] = m.rebuffers_per_playhour;
  d["average_video_rate_kbps"] = m.average_video_rate_kbps;
  d["switch_rate_per_playhour"] = m.switch_rate_per_playhour;
  d["rebuffer_count"] = m.rebuffer_count;
  d["switch_count"] = m.switch_count;
  d["chunks"] = m.chunks;
  d["played_s"] = m.played_s;
  d["stall_s"] = m.stall_s;
  return d;
}

}  // namespace

PYBIND11_MODULE(_abrlab, m) {
  m.doc() = "Playback-buffer simulator for adaptive streaming";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<VideoManifest>(m, "VideoManifest")
      .def_readonly("title_id", &VideoManifest::title_id)
      .def_readonly("chunk_duration_s", &VideoManifest::chunk_duration_s)
      .def_readonly("rates_kbps", &VideoManifest::rates_kbps)
      .def_readonly("chunk_sizes_kbit", &VideoManifest::chunk_sizes_kbit)
      .def_property_readonly("chunk_count", &VideoManifest::chunk_count)
      .def("to_json", [](const VideoManifest& v) { return format_manifest(v); });

  py::class_<CapacityTrace>(m, "CapacityTrace")
      .def_property_readonly("breakpoints",
                             [](const CapacityTrace& t) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& p : t.breakpoints) {
                                 out.emplace_back(p.time_s, p.capacity_kbps);
                               }
                               return out;
                             })
      .def_readonly("duration_s", &CapacityTrace::duration_s)
      .def("capacity_at", &CapacityTrace::capacity_at, py::arg("t"))
      .def("to_csv", [](const CapacityTrace& t) { return format_capacity_trace(t); });

  py::class_<SessionEvent>(m, "SessionEvent")
      .def_readonly("time_s", &SessionEvent::time_s)
      .def_property_readonly(
          "kind", [](const SessionEvent& e) { return std::string(event_kind_name(e.kind)); })
      .def_readonly("rate_index", &SessionEvent::rate_index)
      .def_readonly("chunk_index", &SessionEvent::chunk_index)
      .def_readonly("buffer_s", &SessionEvent::buffer_s);

  py::class_<SessionLog>(m, "SessionLog")
      .def_readonly("title_id", &SessionLog::title_id)
      .def_readonly("algorithm", &SessionLog::algorithm)
      .def_readonly("events", &SessionLog::events)
      .def_readonly("truncated", &SessionLog::truncated)
      .def("to_json", [](const SessionLog& l) { return session_log_to_json(l); });

  m.def("parse_manifest", [](const std::string& s) { return parse_manifest(s); });
  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def("parse_capacity_trace",
        [](const std::string& s) { return parse_capacity_trace(s); });
  m.def("load_capacity_trace", &load_capacity_trace, py::arg("path"));
  m.def("constant_trace", &CapacityTrace::constant, py::arg("capacity_kbps"),
        py::arg("duration_s"));
  m.def("trace_from_points",
        [](const std::vector<std::pair<double, double>>& pts, double duration) {
          std::vector<CapacityPoint> points;
          for (const auto& [t, c] : pts) points.push_back({t, c});
          return CapacityTrace::from_points(std::move(points), duration);
        },
        py::arg("points"), py::arg("duration_s"));

  m.def("generate_vbr_manifest",
        [](const std::vector<double>& rates, std::size_t chunks, double v,
           double dispersion, std::uint64_t seed) {
          return generate_vbr_manifest(rates, chunks, v, dispersion, seed);
        },
        py::arg("rates_kbps"), py::arg("chunk_count"),
        py::arg("chunk_duration_s") = 4.0, py::arg("dispersion") = 0.0,
        py::arg("seed") = 1);
  m.def("generate_outage_trace", &generate_outage_trace, py::arg("base_kbps"),
        py::arg("outage_start_s"), py::arg("outage_len_s"),
        py::arg("duration_s"));

  m.def("capacity_integral", &capacity_integral, py::arg("trace"),
        py::arg("t0"), py::arg("t1"));
  m.def("invert_capacity", &invert_capacity, py::arg("trace"), py::arg("t0"),
        py::arg("kbit"));

  m.def("algorithm_names", &abr_names);
  m.def("sticky_rate_choice",
        [](const std::vector<double>& rates, std::size_t prev, double f,
           bool pinned) { return sticky_rate_choice(rates, prev, f, pinned); },
        py::arg("rates_kbps"), py::arg("prev_index"), py::arg("f_kbps"),
        py::arg("pinned_ends") = false);
  m.def("compute_reservoir",
        [](const VideoManifest& v, std::size_t playhead,
           const std::optional<std::string>& config) {
          return compute_reservoir(v, playhead, config_from(config));
        },
        py::arg("manifest"), py::arg("playhead_chunk") = 0,
        py::arg("config_yaml") = py::none());

  m.def("simulate",
        [](const VideoManifest& v, const CapacityTrace& t,
           const std::string& algorithm,
           const std::optional<std::string>& config) {
          SessionConfig cfg = config_from(config);
          cfg.abr_algorithm = parse_abr_name(algorithm);
          py::gil_scoped_release release;
          return simulate_session(v, t, cfg.abr_algorithm, cfg);
        },
        py::arg("manifest"), py::arg("trace"), py::arg("algorithm") = "bba1",
        py::arg("config_yaml") = py::none());

  m.def("compute_metrics",
        [](const SessionLog& log, const VideoManifest& v) {
          return metrics_dict(compute_metrics(log, v));
        },
        py::arg("log"), py::arg("manifest"));
  m.def("timeseries",
        [](const SessionLog& log, const VideoManifest& v, double cadence) {
          std::vector<std::tuple<double, double, double>> out;
          for (const auto& r : sample_timeseries(log, v, cadence)) {
            out.emplace_back(r.time_s, r.buffer_s, r.rate_kbps);
          }
          return out;
        },
        py::arg("log"), py::arg("manifest"), py::arg("cadence_s") = 1.0);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          py::gil_scoped_release release;
          return run_cli(args);
        },
        py::arg("args"));
}
