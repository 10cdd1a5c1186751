#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "mixlab/checks.hpp"
#include "mixlab/mixture.hpp"
#include "mixlab/quad.hpp"

namespace mixlab {

enum class MinimizeMethod { Grid, ProjectedDescent };

struct TraceEntry {
  std::vector<double> squares;
  double value = 0.0;
  double error_bound = 0.0;
};

/// Minimum over evaluated points of p ↦ I(Σ √pᵢ Xᵢ), Xᵢ i.i.d. copies of the model.
struct MinimizeResult {
  std::vector<double> best_squares;
  double best_value = 0.0;
  double best_error = 0.0;
  std::vector<TraceEntry> trace;
  MinimizeMethod method = MinimizeMethod::Grid;
  /// False when the evaluation budget ran out first.
  bool complete = true;
  /// "vertex", "boundary" or "interior".
  std::string location;
  /// Permutation symmetry on the trace, 1/Var(X) ≤ I(S) ≤ I(X), and the
  /// entropy of the sum being largest at equal weights.
  std::vector<CheckReport> checks;
};

struct MinimizeSpec {
  std::size_t n = 2;
  MinimizeMethod method = MinimizeMethod::Grid;
  /// Grid spacing on the squares is 1/grid_steps.
  std::size_t grid_steps = 40;
  std::size_t budget = 100'000;
  std::uint64_t seed = 0;
  QuadSpec quad;
  double tolerance = 1e-8;
};

/// Simplex lattice {k/steps : Σk = steps} in lexicographic order.
std::vector<std::vector<double>> simplex_lattice(std::size_t n, std::size_t steps);

/// DomainError for n outside [1, 4] or non-scalar models.
MinimizeResult minimize_fisher(const MixtureDensity& model, const MinimizeSpec& spec);

nlohmann::json to_json(const MinimizeResult& r);
/// CSV with header p1,…,pn,value,error_bound.
std::string trace_to_csv(const MinimizeResult& r);
const char* to_string(MinimizeMethod m);

}  // namespace mixlab
