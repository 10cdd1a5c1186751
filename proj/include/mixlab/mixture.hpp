#pragma once

#include <array>
#include <cstdint>
#include <json.hpp>
#include <span>
#include <vector>

#include "mixlab/matana.hpp"
#include "mixlab/mixers.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

/// A point (a₁², …, aₙ²) of the simplex together with the unit vector a.
class SimplexPoint {
 public:
  /// a must satisfy Σaᵢ² = 1 within 1e-12.
  static SimplexPoint from_weights(std::vector<double> a);
  /// Squares must be non-negative and sum to 1 within 1e-12; aᵢ = √πᵢ.
  static SimplexPoint from_squares(std::vector<double> squares);
  static SimplexPoint equal(std::size_t n);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& squares() const { return squares_; }
  std::size_t size() const { return weights_.size(); }

 private:
  SimplexPoint(std::vector<double> a, std::vector<double> sq) : weights_(std::move(a)), squares_(std::move(sq)) {}
  std::vector<double> weights_;
  std::vector<double> squares_;
};

/// Centered Gaussian mixture X = YZ with an atomic mixer.
///
/// Density, score and gradient are evaluated in log-sum-exp form, so they
/// stay finite and accurate far into the tails. Per-atom precisions and log
/// normalizers are computed once at construction.
class MixtureDensity {
 public:
  explicit MixtureDensity(const ScalarMixerAtomic& mixer);
  /// 1×1 matrix mixers are converted to the scalar representation.
  explicit MixtureDensity(const MatrixMixerAtomic& mixer);
  explicit MixtureDensity(const AtomicMixer& mixer);

  int dimension() const { return dim_; }
  std::size_t atom_count() const { return weights_.size(); }
  const AtomicMixer& mixer() const { return mixer_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Variances σ_k² (d = 1 only).
  const std::vector<double>& variances() const;
  /// Covariance YₖYₖᵀ of atom k, any dimension.
  SymMatrix covariance_atom(std::size_t k) const;
  /// Square root of the largest eigenvalue over all atom covariances.
  double max_scale() const { return max_scale_; }
  double min_scale() const { return min_scale_; }

  double log_density(const Vector& x) const;
  double density(const Vector& x) const;
  Vector score(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  double log_density(double x) const;
  double density(double x) const;
  double score(double x) const;

  /// d = 1 fused evaluation: log f(x) and score(x).
  void evaluate_1d(double x, double& log_f, double& score) const;
  /// d = 2 fused evaluation: log f(x) and both score components.
  void evaluate_2d(double x1, double x2, double& log_f, double& s1, double& s2) const;

  /// One draw X = Y_K Z into `out` (size d).
  void draw(Rng& rng, Vector& out) const;
  double draw_1d(Rng& rng) const;

 private:
  void init_scalar(const ScalarMixerAtomic& mixer);
  void init_matrix(const MatrixMixerAtomic& mixer);
  void require_finite(const Vector& x) const;
  std::size_t pick_atom(Rng& rng) const;

  int dim_ = 1;
  AtomicMixer mixer_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::vector<double> log_norm_;  // log wₖ − (d/2)log 2π − log det Yₖ
  // d = 1
  std::vector<double> variances_;
  std::vector<double> inv_var_;
  std::vector<double> scales_;
  // d ≥ 2
  std::vector<Matrix> precisions_;
  std::vector<Matrix> factors_;  // Yₖ, used for sampling
  std::vector<std::array<double, 3>> prec2_;
  double max_scale_ = 0.0;
  double min_scale_ = 0.0;
};

inline constexpr std::size_t kDefaultAtomCap = 1'000'000;

/// Law of Σ aᵢXᵢ for independent mixtures Xᵢ: the mixture with mixer
/// (Σ aᵢ² YᵢYᵢᵀ)^{1/2} over the product of atom choices, merging duplicate
/// atoms after every factor. CapacityError once more than `cap` atoms would
/// remain; Monte Carlo atomization is the fallback for such laws.
MixtureDensity weighted_sum_law(std::span<const MixtureDensity> models, const SimplexPoint& point,
                                std::size_t cap = kDefaultAtomCap);

/// θ·f₁ + (1−θ)·f₂ as a single atomic mixture (atoms concatenated).
MixtureDensity blend(const MixtureDensity& first, const MixtureDensity& second, double theta);

/// n i.i.d. draws X = Y_K Z, deterministic per seed.
std::vector<Vector> sample(const MixtureDensity& mix, std::size_t n, std::uint64_t seed);

nlohmann::json mixture_to_json(const MixtureDensity& mix);
/// Mixer document plus an optional "dimension" (must agree with the atoms).
MixtureDensity mixture_from_json(const nlohmann::json& doc);

}  // namespace mixlab
