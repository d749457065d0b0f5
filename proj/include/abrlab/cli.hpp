#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abrlab/batch.hpp"
#include "abrlab/domain.hpp"
#include "abrlab/simulator.hpp"

namespace abrlab {

// Throws InvalidInput listing the valid names.
AbrKind parse_abr_name(const std::string& name);

// Session config files are YAML. Every key is optional and overrides the
// default; unknown keys are rejected with InvalidInput.
SessionConfig parse_session_config(std::string_view yaml_text,
                                   SessionConfig base = {});
SessionConfig load_session_config(const std::filesystem::path& path,
                                  SessionConfig base = {});

struct ExperimentMatrix {
  std::string control;
  std::vector<AbrKind> algorithms;
  std::vector<std::uint64_t> seeds{1};
  SessionConfig config;
  std::vector<BatchCell> cells;
};

// Reads an experiment matrix and expands it into cells (seed x algorithm x
// manifest x trace). Paths resolve relative to the matrix file. Inputs that
// fail to load become per-cell setup errors rather than exceptions.
ExperimentMatrix load_experiment_matrix(const std::filesystem::path& path);

std::string session_log_to_json(const SessionLog& log,
                                std::uint64_t seed = 0);
std::string timeseries_to_csv(const std::vector<TimeseriesRow>& rows);

// Entry point shared by the abrlab binary and the tests. Exit codes: 0 ok,
// 1 invalid input or usage, 2 I/O failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace abrlab
