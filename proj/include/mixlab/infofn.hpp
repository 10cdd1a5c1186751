#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>

#include "mixlab/matana.hpp"
#include "mixlab/mixture.hpp"
#include "mixlab/quad.hpp"

namespace mixlab {

enum class Method { Quadrature, MonteCarlo };

const char* to_string(Method method);

/// Value with an error bracket. Monte Carlo estimates carry a 99% CI half-width.
struct InfoEstimate {
  double value = 0.0;
  double error_bound = 0.0;
  Method method = Method::Quadrature;
  std::size_t samples_used = 0;
};

struct FisherMatrixEstimate {
  SymMatrix matrix;
  double error_bound = 0.0;  // operator-norm units
  Method method = Method::Quadrature;
  std::size_t samples_used = 0;
};

struct McSpec {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 0;
};

/// Normal quantile for the reported 99% intervals.
inline constexpr double kCiQuantile = 2.576;

/// Shannon entropy −∫ f log f in nats. Quadrature for d ≤ 2, Monte Carlo above.
InfoEstimate entropy(const MixtureDensity& mix, const QuadSpec& spec = {}, const McSpec& mc = {});
/// −mean log f(X) with a Gaussian control variate |x|²/(2s̄²), s̄² = tr Cov / d.
InfoEstimate entropy_monte_carlo(const MixtureDensity& mix, const McSpec& mc);

/// (1−α)⁻¹ log ∫ f^α. α = 1 dispatches to entropy; α ≤ 0 is a DomainError.
InfoEstimate renyi_entropy(const MixtureDensity& mix, double alpha, const QuadSpec& spec = {},
                           const McSpec& mc = {});
InfoEstimate renyi_entropy_monte_carlo(const MixtureDensity& mix, double alpha, const McSpec& mc);

/// 𝓘(X)ᵢⱼ = ∫ ∂ᵢf ∂ⱼf / f. Entrywise quadrature for d ≤ 2; for d ≥ 3 the mean of
/// score·scoreᵀ with a batch-jackknife operator-norm error.
FisherMatrixEstimate fisher_matrix(const MixtureDensity& mix, const QuadSpec& spec = {}, const McSpec& mc = {});
FisherMatrixEstimate fisher_matrix_monte_carlo(const MixtureDensity& mix, const McSpec& mc);

/// Scalar Fisher information I(X) = tr 𝓘(X).
InfoEstimate fisher_information(const MixtureDensity& mix, const QuadSpec& spec = {}, const McSpec& mc = {});

/// Σₖ wₖ YₖYₖᵀ.
SymMatrix covariance(const MixtureDensity& mix);
/// Σₖ wₖ (YₖYₖᵀ)⁻¹, the mixture-of-Gaussians upper bound on 𝓘.
SymMatrix mean_inverse_covariance(const MixtureDensity& mix);

nlohmann::json to_json(const InfoEstimate& e);
nlohmann::json to_json(const FisherMatrixEstimate& e);

}  // namespace mixlab
