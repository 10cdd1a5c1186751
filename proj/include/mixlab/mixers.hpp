#pragma once

#include <cstdint>
#include <json.hpp>
#include <variant>
#include <vector>

#include "mixlab/matana.hpp"

namespace mixlab {

/// Law of a positive scalar scale Y with finitely many atoms.
///
/// Stored in canonical form: scales strictly increasing, atoms closer than
/// 1e-12 merged (weights summed), zero-weight atoms dropped, weights
/// renormalized to sum to one.
class ScalarMixerAtomic {
 public:
  ScalarMixerAtomic(std::vector<double> scales, std::vector<double> weights);
  static ScalarMixerAtomic single(double scale) { return ScalarMixerAtomic({scale}, {1.0}); }

  const std::vector<double>& scales() const { return scales_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return scales_.size(); }

  bool operator==(const ScalarMixerAtomic&) const = default;

 private:
  std::vector<double> scales_;
  std::vector<double> weights_;
};

/// Law of a random symmetric positive-definite d×d matrix Y with finitely many atoms.
class MatrixMixerAtomic {
 public:
  MatrixMixerAtomic(std::vector<SymMatrix> atoms, std::vector<double> weights);
  /// Atoms given as covariances Σ = YYᵀ; Y is the PSD square root.
  static MatrixMixerAtomic from_covariances(const std::vector<SymMatrix>& covariances,
                                            std::vector<double> weights);

  Eigen::Index dim() const { return atoms_.front().dim(); }
  const std::vector<SymMatrix>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return atoms_.size(); }

 private:
  std::vector<SymMatrix> atoms_;
  std::vector<double> weights_;
};

enum class StableKind {
  /// Y = (2G)^{1/2}, G standard positive (p/2)-stable: X = YZ is symmetric p-stable.
  PositiveStablePower,
  /// Y = (2V)^{-1/2}, V with density ∝ t^{-1/2} g_{p/2}(t): X = YZ has density ∝ e^{-|x|^p}.
  GeneralizedGaussianMixer,
};

struct StableMixerSpec {
  StableKind kind = StableKind::PositiveStablePower;
  double p = 1.0;  // in (0, 2)
  std::uint64_t seed = 0;

  void validate() const;
};

using MixerModel = std::variant<ScalarMixerAtomic, MatrixMixerAtomic, StableMixerSpec>;
using AtomicMixer = std::variant<ScalarMixerAtomic, MatrixMixerAtomic>;
using MixerDraws = std::variant<std::vector<double>, std::vector<SymMatrix>>;

/// n i.i.d. draws of the standard positive α-stable law (Laplace transform e^{-s^α}),
/// by Kanter's representation. DomainError unless 0 < α < 1.
std::vector<double> sample_positive_stable(double alpha, std::size_t n, std::uint64_t seed);

/// n i.i.d. draws of the mixing scale (scalars) or matrix.
MixerDraws sample_mixer(const MixerModel& model, std::size_t n, std::uint64_t seed);

/// Empirical approximation with m equal-weight atoms. Atomic inputs are
/// returned unchanged. Stable mixers use Latin-hypercube stratified inputs to
/// the sampling transform, so each atom is an exact draw while the atom set
/// covers the law evenly.
AtomicMixer atomize(const MixerModel& model, std::size_t m, std::uint64_t seed);

/// E[G^s] for G standard positive α-stable; +inf when s ≥ α.
double positive_stable_moment(double alpha, double s);

/// E[Y^s] for a stable mixer spec in closed form; +inf when the moment diverges.
double stable_mixer_moment(const StableMixerSpec& spec, double s);

nlohmann::json mixer_to_json(const MixerModel& model);
/// Parses {"type": "scalar_atomic" | "matrix_atomic" | "stable", ...}.
/// Unknown keys are a ConfigError.
MixerModel mixer_from_json(const nlohmann::json& doc);

const char* to_string(StableKind kind);

}  // namespace mixlab
