#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abrlab/domain.hpp"

namespace abrlab {

struct BatchCell {
  std::string id;
  std::shared_ptr<const VideoManifest> manifest;
  std::shared_ptr<const CapacityTrace> trace;
  AbrKind algorithm = AbrKind::kBba1;
  SessionConfig config;
  std::optional<std::string> window_tag;
  // Set when the cell's inputs could not be prepared; the cell is reported
  // as failed without running.
  std::optional<std::string> setup_error;
};

struct BatchOutcome {
  std::string id;
  AbrKind algorithm = AbrKind::kBba1;
  std::optional<SessionLog> log;
  std::string error;

  bool ok() const { return log.has_value(); }
};

// Runs every cell independently on up to `jobs` threads. Outcomes come back
// in cell order regardless of scheduling; a failing cell records its error
// and the rest still run.
std::vector<BatchOutcome> run_batch(std::span<const BatchCell> cells,
                                    std::size_t jobs = 1);

struct NamedManifest {
  std::string name;
  std::shared_ptr<const VideoManifest> manifest;
};

struct NamedTrace {
  std::string name;
  std::shared_ptr<const CapacityTrace> trace;
  std::optional<std::string> window_tag;
};

// Cartesian product algorithms x manifests x traces, all sharing `cfg`.
std::vector<BatchCell> expand_matrix(std::span<const AbrKind> algorithms,
                                     std::span<const NamedManifest> manifests,
                                     std::span<const NamedTrace> traces,
                                     const SessionConfig& cfg);

}  // namespace abrlab
