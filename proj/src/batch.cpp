#include "abrlab/batch.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "abrlab/simulator.hpp"

namespace abrlab {

namespace {

BatchOutcome run_cell(const BatchCell& cell) {
  BatchOutcome out;
  out.id = cell.id;
  out.algorithm = cell.algorithm;
  if (cell.setup_error) {
    out.error = *cell.setup_error;
    return out;
  }
  if (!cell.manifest || !cell.trace) {
    out.error = "cell is missing its manifest or trace";
    return out;
  }
  try {
    SessionLog log = simulate_session(*cell.manifest, *cell.trace,
                                      cell.algorithm, cell.config);
    log.window_tag = cell.window_tag;
    out.log = std::move(log);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<BatchOutcome> run_batch(std::span<const BatchCell> cells,
                                    std::size_t jobs) {
  std::vector<BatchOutcome> outcomes(cells.size());
  const std::size_t workers =
      std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(cells.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      outcomes[i] = run_cell(cells[i]);
    }
    return outcomes;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        outcomes[i] = run_cell(cells[i]);
      }
    });
  }
  pool.clear();  // joins
  return outcomes;
}

std::vector<BatchCell> expand_matrix(std::span<const AbrKind> algorithms,
                                     std::span<const NamedManifest> manifests,
                                     std::span<const NamedTrace> traces,
                                     const SessionConfig& cfg) {
  std::vector<BatchCell> cells;
  cells.reserve(algorithms.size() * manifests.size() * traces.size());
  for (AbrKind algo : algorithms) {
    for (const auto& m : manifests) {
      for (const auto& t : traces) {
        BatchCell cell;
        cell.id = std::string(abr_name(algo)) + "__" + m.name + "__" + t.name;
        cell.manifest = m.manifest;
        cell.trace = t.trace;
        cell.algorithm = algo;
        cell.config = cfg;
        cell.config.abr_algorithm = algo;
        cell.window_tag = t.window_tag;
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

}  // namespace abrlab
