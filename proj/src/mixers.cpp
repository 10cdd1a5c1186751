#include "mixlab/mixers.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "mixlab/error.hpp"
#include "mixlab/quad.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

namespace {

constexpr double kMergeTolerance = 1e-12;

void check_weights(const std::vector<double>& weights, std::size_t expected) {
  if (weights.size() != expected) throw DimensionError("mixer: scales and weights differ in length");
  if (weights.empty()) throw DomainError("mixer: at least one atom is required");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw DomainError("mixer: weights must be finite and non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("mixer: weights sum to " + std::to_string(total) + ", expected 1");
  }
}

void renormalize(std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
}

}  // namespace

ScalarMixerAtomic::ScalarMixerAtomic(std::vector<double> scales, std::vector<double> weights) {
  check_weights(weights, scales.size());
  for (double s : scales) {
    if (!std::isfinite(s) || !(s > 0.0)) throw DomainError("ScalarMixerAtomic: scales must be positive and finite");
  }
  std::vector<std::size_t> order(scales.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scales[a] < scales[b]; });
  for (std::size_t idx : order) {
    if (weights[idx] == 0.0) continue;
    if (!scales_.empty() && scales[idx] - scales_.back() < kMergeTolerance) {
      weights_.back() += weights[idx];
    } else {
      scales_.push_back(scales[idx]);
      weights_.push_back(weights[idx]);
    }
  }
  renormalize(weights_);
}

MatrixMixerAtomic::MatrixMixerAtomic(std::vector<SymMatrix> atoms, std::vector<double> weights) {
  check_weights(weights, atoms.size());
  const Eigen::Index d = atoms.front().dim();
  if (d < 1) throw DimensionError("MatrixMixerAtomic: empty atom");
  for (const auto& a : atoms) {
    if (a.dim() != d) throw DimensionError("MatrixMixerAtomic: atoms differ in dimension");
    if (!a.matrix().allFinite()) throw DomainError("MatrixMixerAtomic: non-finite atom");
    if (!(min_eigenvalue(a) > 0.0)) throw DomainError("MatrixMixerAtomic: atom is not positive definite");
  }
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto lex_less = [&](std::size_t x, std::size_t y) {
    const Matrix& a = atoms[x].matrix();
    const Matrix& b = atoms[y].matrix();
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        if (a(i, j) != b(i, j)) return a(i, j) < b(i, j);
      }
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), lex_less);
  for (std::size_t idx : order) {
    if (weights[idx] == 0.0) continue;
    if (!atoms_.empty() && (atoms[idx].matrix() - atoms_.back().matrix()).norm() < kMergeTolerance) {
      weights_.back() += weights[idx];
    } else {
      atoms_.push_back(atoms[idx]);
      weights_.push_back(weights[idx]);
    }
  }
  renormalize(weights_);
}

MatrixMixerAtomic MatrixMixerAtomic::from_covariances(const std::vector<SymMatrix>& covariances,
                                                      std::vector<double> weights) {
  std::vector<SymMatrix> atoms;
  atoms.reserve(covariances.size());
  for (const auto& c : covariances) atoms.push_back(sqrt_psd(c));
  return MatrixMixerAtomic(std::move(atoms), std::move(weights));
}

void StableMixerSpec::validate() const {
  if (!(p > 0.0 && p < 2.0)) throw DomainError("StableMixerSpec: p must lie in (0, 2), got " + std::to_string(p));
}

const char* to_string(StableKind kind) {
  switch (kind) {
    case StableKind::PositiveStablePower:
      return "positive_stable_power";
    case StableKind::GeneralizedGaussianMixer:
      return "generalized_gaussian_mixer";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Positive stable laws via Kanter's representation
//   G = (A(U) / E)^{(1-α)/α},  U ~ Uniform(0, π),  E ~ Exp(1),
//   A(u) = (sin(αu) / sin u)^{1/(1-α)} · sin((1-α)u) / sin(αu).
// A is increasing on (0, π) with A(0+) = α^{α/(1-α)} (1-α).

namespace {

double log_kanter(double alpha, double u) {
  const double sa = std::sin(alpha * u);
  return (std::log(sa) - std::log(std::sin(u))) / (1.0 - alpha) + std::log(std::sin((1.0 - alpha) * u)) -
         std::log(sa);
}

double log_kanter_at_zero(double alpha) { return alpha / (1.0 - alpha) * std::log(alpha) + std::log1p(-alpha); }

double kanter_transform(double alpha, double angle, double exponential) {
  return std::exp((1.0 - alpha) / alpha * (log_kanter(alpha, angle) - std::log(exponential)));
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("positive stable: alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

/// Exponent c of the tilt G^{-1/2} = (E/A)^{c}: c = (1-α)/(2α).
double tilt_exponent(double alpha) { return (1.0 - alpha) / (2.0 * alpha); }

/// Angle with density ∝ A(u)^{-c} on (0, π), by rejection against Uniform(0, π).
double sample_tilted_angle(double alpha, Rng& rng) {
  const double c = tilt_exponent(alpha);
  const double log_a0 = log_kanter_at_zero(alpha);
  for (;;) {
    const double u = std::numbers::pi * rng.uniform();
    if (std::log(rng.uniform()) <= c * (log_a0 - log_kanter(alpha, u))) return u;
  }
}

/// Quantile function of the tilted angle law, used for stratified atomization.
class TiltedAngleQuantile {
 public:
  explicit TiltedAngleQuantile(double alpha) : alpha_(alpha), c_(tilt_exponent(alpha)) {
    constexpr std::size_t cells = 1024;
    grid_.resize(cells + 1);
    cdf_.assign(cells + 1, 0.0);
    for (std::size_t i = 0; i <= cells; ++i) grid_[i] = std::numbers::pi * static_cast<double>(i) / cells;
    for (std::size_t i = 0; i < cells; ++i) cdf_[i + 1] = cdf_[i] + mass(grid_[i], grid_[i + 1]);
    total_ = cdf_.back();
  }

  double operator()(double q) const {
    const double target = q * total_;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t cell = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - cdf_.begin() - 1));
    cell = std::min(cell, grid_.size() - 2);
    double lo = grid_[cell];
    double hi = grid_[cell + 1];
    const double base = cdf_[cell];
    double u = 0.5 * (lo + hi);
    for (int iter = 0; iter < 60; ++iter) {
      const double g = base + mass(grid_[cell], u) - target;
      if (g > 0.0) {
        hi = u;
      } else {
        lo = u;
      }
      const double dens = density(u);
      double next = dens > 0.0 ? u - g / dens : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - u) < 1e-15 * std::numbers::pi) return next;
      u = next;
    }
    return u;
  }

 private:
  double density(double u) const {
    if (u <= 0.0) return std::exp(-c_ * log_kanter_at_zero(alpha_));
    if (u >= std::numbers::pi) return 0.0;
    return std::exp(-c_ * log_kanter(alpha_, u));
  }

  double mass(double a, double b) const {
    if (!(b > a)) return 0.0;
    auto f = [&](double u) { return quad_detail::Values<1>{density(u)}; };
    return quad_detail::gk15_panel<1>(f, a, b, 1).kronrod[0];
  }

  double alpha_;
  double c_;
  std::vector<double> grid_;
  std::vector<double> cdf_;
  double total_ = 0.0;
};

double stable_scale(const StableMixerSpec& spec, double stable_draw) {
  // stable_draw is G for the power kind and V for the generalized-gaussian kind.
  if (spec.kind == StableKind::PositiveStablePower) return std::sqrt(2.0 * stable_draw);
  return 1.0 / std::sqrt(2.0 * stable_draw);
}

std::vector<double> sample_stable_scales(const StableMixerSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  const double alpha = spec.p / 2.0;
  std::vector<double> out(n);
  Rng rng(seed);
  if (spec.kind == StableKind::PositiveStablePower) {
    for (auto& y : out) {
      const double angle = std::numbers::pi * rng.uniform();
      const double e = rng.exponential();
      y = stable_scale(spec, kanter_transform(alpha, angle, e));
    }
  } else {
    const double shape = 1.0 + tilt_exponent(alpha);
    for (auto& y : out) {
      const double angle = sample_tilted_angle(alpha, rng);
      const double e = rng.gamma(shape);
      y = stable_scale(spec, kanter_transform(alpha, angle, e));
    }
  }
  return out;
}

std::vector<std::size_t> random_permutation(std::size_t m, Rng& rng) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = m; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  return perm;
}

std::vector<double> stratified_stable_scales(const StableMixerSpec& spec, std::size_t m, std::uint64_t seed) {
  spec.validate();
  const double alpha = spec.p / 2.0;
  Rng rng(seed);
  const auto perm_angle = random_permutation(m, rng);
  const auto perm_exp = random_permutation(m, rng);
  const double inv_m = 1.0 / static_cast<double>(m);
  std::vector<double> out(m);
  if (spec.kind == StableKind::PositiveStablePower) {
    for (std::size_t k = 0; k < m; ++k) {
      const double q1 = (static_cast<double>(perm_angle[k]) + rng.uniform()) * inv_m;
      const double q2 = (static_cast<double>(perm_exp[k]) + rng.uniform()) * inv_m;
      out[k] = stable_scale(spec, kanter_transform(alpha, std::numbers::pi * q1, -std::log(q2)));
    }
  } else {
    const double shape = 1.0 + tilt_exponent(alpha);
    const TiltedAngleQuantile angle_quantile(alpha);
    for (std::size_t k = 0; k < m; ++k) {
      const double q1 = (static_cast<double>(perm_angle[k]) + rng.uniform()) * inv_m;
      const double q2 = (static_cast<double>(perm_exp[k]) + rng.uniform()) * inv_m;
      const double e = boost::math::gamma_p_inv(shape, q2);
      out[k] = stable_scale(spec, kanter_transform(alpha, angle_quantile(q1), e));
    }
  }
  return out;
}

}  // namespace

std::vector<double> sample_positive_stable(double alpha, std::size_t n, std::uint64_t seed) {
  require_alpha(alpha);
  std::vector<double> out(n);
  Rng rng(seed);
  for (auto& x : out) {
    const double angle = std::numbers::pi * rng.uniform();
    x = kanter_transform(alpha, angle, rng.exponential());
  }
  return out;
}

double positive_stable_moment(double alpha, double s) {
  require_alpha(alpha);
  if (s >= alpha) return std::numeric_limits<double>::infinity();
  return std::exp(std::lgamma(1.0 - s / alpha) - std::lgamma(1.0 - s));
}

double stable_mixer_moment(const StableMixerSpec& spec, double s) {
  spec.validate();
  const double alpha = spec.p / 2.0;
  if (spec.kind == StableKind::PositiveStablePower) {
    return std::pow(2.0, s / 2.0) * positive_stable_moment(alpha, s / 2.0);
  }
  const double num = positive_stable_moment(alpha, -s / 2.0 - 0.5);
  if (std::isinf(num)) return num;
  return std::pow(2.0, -s / 2.0) * num / positive_stable_moment(alpha, -0.5);
}

MixerDraws sample_mixer(const MixerModel& model, std::size_t n, std::uint64_t seed) {
  if (const auto* spec = std::get_if<StableMixerSpec>(&model)) return sample_stable_scales(*spec, n, seed);

  auto pick = [&](const std::vector<double>& weights) {
    std::vector<double> cumulative(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    Rng rng(seed);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) {
      const double u = rng.uniform() * cumulative.back();
      i = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      i = std::min(i, weights.size() - 1);
    }
    return idx;
  };

  if (const auto* scalar = std::get_if<ScalarMixerAtomic>(&model)) {
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i : pick(scalar->weights())) out.push_back(scalar->scales()[i]);
    return out;
  }
  const auto& matrix = std::get<MatrixMixerAtomic>(model);
  std::vector<SymMatrix> out;
  out.reserve(n);
  for (std::size_t i : pick(matrix.weights())) out.push_back(matrix.atoms()[i]);
  return out;
}

AtomicMixer atomize(const MixerModel& model, std::size_t m, std::uint64_t seed) {
  if (const auto* scalar = std::get_if<ScalarMixerAtomic>(&model)) return *scalar;
  if (const auto* matrix = std::get_if<MatrixMixerAtomic>(&model)) return *matrix;
  if (m < 1) throw DomainError("atomize: m must be at least 1");
  auto scales = stratified_stable_scales(std::get<StableMixerSpec>(model), m, seed);
  std::vector<double> weights(m, 1.0 / static_cast<double>(m));
  return ScalarMixerAtomic(std::move(scales), std::move(weights));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void reject_unknown_keys(const nlohmann::json& doc, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : doc.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("mixer document: unknown key '" + key + "'");
  }
}

const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("mixer document: missing key '") + key + "'");
  return doc.at(key);
}

std::vector<double> number_list(const nlohmann::json& node, const char* what) {
  if (!node.is_array()) throw ConfigError(std::string("mixer document: '") + what + "' must be an array");
  std::vector<double> out;
  for (const auto& v : node) {
    if (!v.is_number()) throw ConfigError(std::string("mixer document: '") + what + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

SymMatrix matrix_from_rows(const nlohmann::json& node, Eigen::Index d) {
  if (!node.is_array() || static_cast<Eigen::Index>(node.size()) != d) {
    throw ConfigError("mixer document: atom must have " + std::to_string(d) + " rows");
  }
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto row = number_list(node[static_cast<std::size_t>(i)], "atoms");
    if (static_cast<Eigen::Index>(row.size()) != d) throw ConfigError("mixer document: atom row has wrong length");
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("mixer document: atom is not symmetric");
  }
  return SymMatrix(m);
}

}  // namespace

nlohmann::json mixer_to_json(const MixerModel& model) {
  using nlohmann::json;
  if (const auto* scalar = std::get_if<ScalarMixerAtomic>(&model)) {
    return json{{"type", "scalar_atomic"}, {"scales", scalar->scales()}, {"weights", scalar->weights()}};
  }
  if (const auto* matrix = std::get_if<MatrixMixerAtomic>(&model)) {
    json atoms = json::array();
    for (const auto& a : matrix->atoms()) {
      json rows = json::array();
      for (Eigen::Index i = 0; i < a.dim(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < a.dim(); ++j) row.push_back(a(i, j));
        rows.push_back(row);
      }
      atoms.push_back(rows);
    }
    return json{{"type", "matrix_atomic"},
                {"dimension", matrix->dim()},
                {"atoms", atoms},
                {"weights", matrix->weights()}};
  }
  const auto& spec = std::get<StableMixerSpec>(model);
  return json{{"type", "stable"}, {"kind", to_string(spec.kind)}, {"p", spec.p}, {"seed", spec.seed}};
}

MixerModel mixer_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("mixer document: expected an object");
  const auto& type_node = require(doc, "type");
  if (!type_node.is_string()) throw ConfigError("mixer document: 'type' must be a string");
  const auto type = type_node.get<std::string>();
  try {
    if (type == "scalar_atomic") {
      reject_unknown_keys(doc, {"type", "scales", "weights", "dimension"});
      if (doc.contains("dimension") && doc.at("dimension") != 1) {
        throw ConfigError("mixer document: scalar_atomic requires dimension 1");
      }
      return ScalarMixerAtomic(number_list(require(doc, "scales"), "scales"),
                               number_list(require(doc, "weights"), "weights"));
    }
    if (type == "matrix_atomic") {
      reject_unknown_keys(doc, {"type", "dimension", "atoms", "weights"});
      const auto& atoms_node = require(doc, "atoms");
      if (!atoms_node.is_array() || atoms_node.empty()) throw ConfigError("mixer document: 'atoms' must be non-empty");
      const auto d = static_cast<Eigen::Index>(
          doc.contains("dimension") ? doc.at("dimension").get<long>() : static_cast<long>(atoms_node[0].size()));
      if (d < 1) throw ConfigError("mixer document: dimension must be positive");
      std::vector<SymMatrix> atoms;
      for (const auto& a : atoms_node) atoms.push_back(matrix_from_rows(a, d));
      return MatrixMixerAtomic(std::move(atoms), number_list(require(doc, "weights"), "weights"));
    }
    if (type == "stable") {
      reject_unknown_keys(doc, {"type", "kind", "p", "seed"});
      StableMixerSpec spec;
      const auto kind = require(doc, "kind").get<std::string>();
      if (kind == "positive_stable_power") {
        spec.kind = StableKind::PositiveStablePower;
      } else if (kind == "generalized_gaussian_mixer") {
        spec.kind = StableKind::GeneralizedGaussianMixer;
      } else {
        throw ConfigError("mixer document: unknown stable kind '" + kind + "'");
      }
      spec.p = require(doc, "p").get<double>();
      if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
      spec.validate();
      return spec;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mixer document: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("mixer document: ") + e.what());
  }
  throw ConfigError("mixer document: unknown type '" + type + "'");
}

}  // namespace mixlab
