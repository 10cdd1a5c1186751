#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "mixlab/matana.hpp"
#include "mixlab/mixers.hpp"
#include "mixlab/mixture.hpp"
#include "mixlab/quad.hpp"

namespace mixlab {

enum class WeightScheme { Equal, Explicit };

struct CltConfig {
  MixerModel base_model = ScalarMixerAtomic::single(1.0);
  std::vector<double> deltas{0.25, 0.5, 1.0};
  /// Dimensions for scalar base models, run as products of independent
  /// coordinates (commuting diagonal atoms). Matrix models use their own d.
  std::vector<int> dimensions{1};
  WeightScheme scheme = WeightScheme::Equal;
  std::vector<std::size_t> n_values;
  /// Explicit scheme: squares a₁², …, aₙ² of each point.
  std::vector<std::vector<double>> points;
  /// Initial atom count for Monte Carlo atomization; 0 disables it.
  std::size_t atomization_m = 0;
  std::size_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  std::size_t atom_cap = kDefaultAtomCap;
  QuadSpec quad;

  void validate() const;
};

/// ‖Cov(Sₙ)^{1/2} 𝓘(Sₙ) Cov(Sₙ)^{1/2} − I_d‖_op for one weight vector.
struct Deviation {
  std::size_t n = 0;
  int d = 1;
  double deviation = 0.0;
  double error_bound = 0.0;
  /// Smallest eigenvalue of the standardized matrix minus I_d (≥ 0 by Cramér–Rao).
  double min_eigenvalue = 0.0;
  /// "binomial", "exact" or "atomized"; prefixed "product-" for product-diagonal runs.
  std::string method;
  std::size_t m = 0;
  std::size_t samples = 0;
  std::size_t atoms = 0;
};

struct CltRow {
  Deviation dev;
  double delta = 0.0;
  std::string scheme;
  double predictor = 0.0;
};

/// ‖a‖_{2+2δ}^{2δ/(1+δ)} for the weight vector with the given squares.
double clt_predictor(const SimplexPoint& a, double delta);
/// δ²/(1+δ)².
double clt_rate_exponent(double delta);

Deviation standardized_fisher_deviation(const CltConfig& config, const SimplexPoint& a, int d = 1);

/// All (d, point) cells, expanded over δ; ordered by d, then point, then δ.
std::vector<CltRow> run_clt(const CltConfig& config);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS in log space
  std::size_t points_used = 0;
};

/// Least-squares slope of log deviation against log n. Rows whose deviation
/// does not exceed their error bound are excluded; fewer than three usable
/// rows is a DomainError.
RateFit fit_rate(const std::vector<CltRow>& rows);

struct ConstantFit {
  /// max over rows of deviation / (log^δ(d+1) · predictor)
  double constant = 0.0;
  /// constant over all rows divided by the constant over the first half (by n).
  double stability_ratio = 1.0;
};

ConstantFit fit_constant(const std::vector<CltRow>& rows);

enum class TypeNorm { Schatten, Operator };

struct TypeCheckSpec {
  double p = 2.0;
  double delta = 1.0;
  std::size_t n = 12;
  int d = 2;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  TypeNorm norm = TypeNorm::Schatten;
};

struct TypeCheckReport {
  TypeCheckSpec spec;
  /// T^{1+δ}: 1 for p ∈ [1+δ, 2], (p−1)^δ for p ≥ 2, e^{1+δ} log^δ(d+1) for the operator norm.
  double constant = 0.0;
  double worst_ratio = 0.0;
  /// Sign patterns covered; always 2ⁿ (half enumerated, the mirror by ε ↦ −ε).
  std::size_t sign_patterns = 0;
  bool exhaustive = true;
  bool pass = false;
};

/// T^{1+δ} as above. DomainError for Schatten p < 1+δ.
double type_constant(const TypeCheckSpec& spec);
/// Exact mean over all signs of ‖Σεᵢvᵢ‖^{1+δ}, divided by Σ‖vᵢ‖^{1+δ}.
double rademacher_ratio(const std::vector<Matrix>& v, double p, double delta, TypeNorm norm);
/// Random tuples of n Gaussian matrices with log-uniform scales in [¼, 4];
/// CapacityError for n > 20.
TypeCheckReport check_rademacher_type(const TypeCheckSpec& spec);

struct MomentReport {
  /// E‖YYᵀ‖_op^{1+δ}; +inf when divergent.
  double pos_moment = 0.0;
  /// E‖(YYᵀ)⁻¹‖_op^{1+δ}; +inf when divergent.
  double neg_moment = 0.0;
  bool admitted = false;
  std::string method;
};

/// Exact for atomic models, closed form for stable mixer specs.
MomentReport moment_condition_report(const MixerModel& model, double delta);

nlohmann::json to_json(const TypeCheckReport& r);
nlohmann::json to_json(const MomentReport& r);
CltConfig clt_config_from_json(const nlohmann::json& doc);
/// CSV with header n,d,delta,scheme,deviation,error_bound,predictor,method,m,samples.
std::string clt_rows_to_csv(const std::vector<CltRow>& rows);

}  // namespace mixlab
