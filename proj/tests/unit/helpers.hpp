#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "abrlab/domain.hpp"

namespace testing {

inline abrlab::CapacityTrace trace_of(std::vector<abrlab::CapacityPoint> pts,
                                      double duration = INFINITY) {
  return abrlab::CapacityTrace::from_points(std::move(pts), duration);
}

// Manifest whose R_min stream has explicit sizes; higher streams are scaled
// copies.
inline abrlab::VideoManifest manifest_from_rmin_sizes(
    std::vector<double> rates, const std::vector<double>& rmin_sizes,
    double v = 4.0) {
  abrlab::VideoManifest m;
  m.title_id = "t";
  m.chunk_duration_s = v;
  m.rates_kbps = rates;
  for (double r : rates) {
    std::vector<double> s;
    for (double x : rmin_sizes) s.push_back(x * r / rates.front());
    m.chunk_sizes_kbit.push_back(std::move(s));
  }
  return m;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("abrlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
