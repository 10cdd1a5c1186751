#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "mixlab/infofn.hpp"
#include "mixlab/mixture.hpp"
#include "mixlab/quad.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

/// Outcome of one falsifiable inequality check.
///
/// worst_margin is the error-budgeted margin: each raw margin plus the
/// numerical error bound of the quantities it was computed from. A check
/// fails only when that is below −tolerance. Related claims tested on the
/// same instances (EPI next to concavity, say) are attached as companions.
struct CheckReport {
  std::string name;
  std::size_t instances_tested = 0;
  double worst_margin = 0.0;
  double worst_raw_margin = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  bool exploratory = false;
  std::vector<nlohmann::json> witnesses;
  std::vector<CheckReport> companions;

  /// pass of this report and every companion.
  bool all_pass() const;
};

nlohmann::json to_json(const CheckReport& r);

/// Accumulates margins into a CheckReport.
class MarginTracker {
 public:
  MarginTracker(std::string name, double tolerance);
  /// raw + budget is compared against −tolerance; witness is kept on failure.
  void add(double raw, double budget, const nlohmann::json& witness = {});
  CheckReport report() const;

 private:
  CheckReport r_;
  bool any_ = false;
};

inline constexpr std::size_t kMaxWitnesses = 10;

/// Combines reports of the same check run on different instances: counts add,
/// margins take the minimum, companions merge by position.
CheckReport merge_reports(const std::vector<CheckReport>& reports);

/// Parent report whose margins are the minimum over `parts`, kept as companions.
CheckReport group_reports(std::string name, std::vector<CheckReport> parts, double tolerance);

/// h (α = 1) or h_α of a mixture.
InfoEstimate entropy_of_order(const MixtureDensity& mix, double alpha, const QuadSpec& spec);

/// g(t) = h(√t X₁ + √(1−t) X₂) on the uniform grid of t_grid points in [0, 1].
/// Margin: −(g(t−h) − 2g(t) + g(t+h))/h², budgeted by the entropy errors.
/// Companion "epi": g(t) − t g(1) − (1−t) g(0).
CheckReport check_entropy_concavity_t(const MixtureDensity& model1, const MixtureDensity& model2,
                                      std::size_t t_grid = 41, const QuadSpec& spec = {},
                                      double tolerance = 1e-6, double epi_tolerance = 1e-8);

/// Concavity of p ↦ h_α(Σ √pᵢ Xᵢ) along random chords of the simplex
/// (λ ∈ {¼, ½, ¾}). Matrix models run as an exploratory check.
CheckReport check_simplex_concavity(const std::vector<MixtureDensity>& models, double alpha, std::size_t pairs,
                                    std::uint64_t seed, const QuadSpec& spec = {}, double tolerance = 1e-6);

/// For i.i.d. models: a² ⪯_m b² ⇒ h_α(Σ aᵢXᵢ) ≥ h_α(Σ bᵢXᵢ). Pairs are b² ~ Dirichlet(1)
/// and a² a random convex combination of permutations of b². Companion
/// "equal_weights_max": the equal-weights value dominates every evaluated point.
CheckReport check_schur_concavity(const std::vector<MixtureDensity>& models, std::size_t pairs,
                                  std::uint64_t seed, const QuadSpec& spec = {}, double alpha = 1.0,
                                  double tolerance = 1e-6);

/// 𝓘(θf₁ + (1−θ)f₂) ⪯ θ𝓘(f₁) + (1−θ)𝓘(f₂) on a uniform θ grid.
CheckReport check_fisher_jensen(const MixtureDensity& model1, const MixtureDensity& model2,
                                std::size_t theta_grid = 11, const QuadSpec& spec = {}, double tolerance = 1e-8);

/// 1/I(√t X₁ + √(1−t) X₂) − t/I(X₁) − (1−t)/I(X₂) ≥ 0 on a uniform t grid.
CheckReport check_blachman_stam(const MixtureDensity& model1, const MixtureDensity& model2,
                                std::size_t t_grid = 11, const QuadSpec& spec = {}, double tolerance = 1e-8);

/// Cramér–Rao 𝓘 ⪰ Cov⁻¹ and the mixture bound 𝓘 ⪯ Σ wₖ(YₖYₖᵀ)⁻¹, as two companions.
CheckReport check_fisher_sandwich(const std::vector<MixtureDensity>& models, const QuadSpec& spec = {},
                                  double tolerance = 1e-8);

/// R(x, λ) = xxᵀ/λ is jointly operator convex on ℝᵈ × (0, ∞).
/// λ_min(θR(x,λ) + (1−θ)R(y,μ) − R(θx + (1−θ)y, θλ + (1−θ)μ)) and its rounding budget.
std::pair<double, double> R_convexity_gap(const Vector& x, const Vector& y, double lambda, double mu, double theta);

CheckReport check_R_convexity(std::size_t samples, std::uint64_t seed, int d = 3, double tolerance = 1e-10);

/// The fixed witness A = [[2,1],[1,1]], Y = [[1,1],[1,1]] for f(X) = √X·Y·√X:
/// Y ⪯ A, yet A² − Y², f(A) − f(Y) and f((Y+A)/2) − (f(Y)+f(A))/2 are not PSD.
/// Passes when all three failures are confirmed; each companion margin is
/// −λ_min − tolerance for the failure claims and λ_min for Y ⪯ A.
CheckReport verify_sqrtXYsqrtX_counterexample(double tolerance = 1e-9);

/// Scalar model with 1–4 atoms, scales log-uniform on [0.25, 4], Dirichlet(1) weights.
MixtureDensity random_scalar_model(Rng& rng);
/// d×d analogue: atoms Q diag(s) Qᵀ with Q a random rotation and s as above.
MixtureDensity random_matrix_model(Rng& rng, int d);
/// Dirichlet(1, …, 1) point.
std::vector<double> random_simplex(Rng& rng, std::size_t n);

}  // namespace mixlab
