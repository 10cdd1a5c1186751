#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "mixlab/checks.hpp"

namespace mixlab {

struct SuiteResult {
  std::vector<CheckReport> reports;
  std::string clt_csv;
  std::string fishmin_csv;

  bool pass() const;
  /// {name: {pass, worst_margin}}, companions flattened as "name.companion".
  nlohmann::json summary() const;
};

/// The reduced acceptance battery: calibration, every theorem-backed check on
/// random models drawn from `seed`, the counterexample, a CLT sweep, type
/// checks, the moment gate and a Fisher minimization.
SuiteResult run_suite(std::uint64_t seed);

/// Writes summary.json, reports.json, clt.csv and fishmin_trace.csv.
void write_suite(const SuiteResult& result, const std::filesystem::path& dir);

}  // namespace mixlab
