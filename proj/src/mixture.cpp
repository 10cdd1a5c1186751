#include "mixlab/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "mixlab/error.hpp"

namespace mixlab {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

// ---------------------------------------------------------------------------
// SimplexPoint

SimplexPoint SimplexPoint::from_weights(std::vector<double> a) {
  if (a.empty()) throw DomainError("SimplexPoint: empty weight vector");
  std::vector<double> sq(a.size());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) throw DomainError("SimplexPoint: non-finite weight");
    sq[i] = a[i] * a[i];
    total += sq[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("SimplexPoint: weights are not a unit vector (|a|² = " + std::to_string(total) + ")");
  }
  return SimplexPoint(std::move(a), std::move(sq));
}

SimplexPoint SimplexPoint::from_squares(std::vector<double> squares) {
  if (squares.empty()) throw DomainError("SimplexPoint: empty simplex point");
  double total = 0.0;
  for (double s : squares) {
    if (!std::isfinite(s) || s < 0.0) throw DomainError("SimplexPoint: squares must be finite and non-negative");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("SimplexPoint: squares sum to " + std::to_string(total) + ", expected 1");
  }
  std::vector<double> a(squares.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::sqrt(squares[i]);
  return SimplexPoint(std::move(a), std::move(squares));
}

SimplexPoint SimplexPoint::equal(std::size_t n) {
  if (n == 0) throw DomainError("SimplexPoint: n must be positive");
  const double sq = 1.0 / static_cast<double>(n);
  return SimplexPoint(std::vector<double>(n, std::sqrt(sq)), std::vector<double>(n, sq));
}

// ---------------------------------------------------------------------------
// MixtureDensity

MixtureDensity::MixtureDensity(const ScalarMixerAtomic& mixer) : dim_(1), mixer_(mixer) { init_scalar(mixer); }

MixtureDensity::MixtureDensity(const MatrixMixerAtomic& mixer)
    : dim_(static_cast<int>(mixer.dim())), mixer_(mixer) {
  if (dim_ == 1) {
    std::vector<double> scales;
    for (const auto& a : mixer.atoms()) scales.push_back(a(0, 0));
    ScalarMixerAtomic scalar(std::move(scales), mixer.weights());
    mixer_ = scalar;
    init_scalar(scalar);
  } else {
    init_matrix(mixer);
  }
}

MixtureDensity::MixtureDensity(const AtomicMixer& mixer)
    : MixtureDensity(std::holds_alternative<ScalarMixerAtomic>(mixer)
                         ? MixtureDensity(std::get<ScalarMixerAtomic>(mixer))
                         : MixtureDensity(std::get<MatrixMixerAtomic>(mixer))) {}

void MixtureDensity::init_scalar(const ScalarMixerAtomic& mixer) {
  weights_ = mixer.weights();
  scales_ = mixer.scales();
  const std::size_t k = scales_.size();
  variances_.resize(k);
  inv_var_.resize(k);
  log_norm_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    variances_[i] = scales_[i] * scales_[i];
    inv_var_[i] = 1.0 / variances_[i];
    log_norm_[i] = std::log(weights_[i]) - 0.5 * kLog2Pi - std::log(scales_[i]);
  }
  min_scale_ = scales_.front();
  max_scale_ = scales_.back();
  cumulative_.resize(k);
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

void MixtureDensity::init_matrix(const MatrixMixerAtomic& mixer) {
  weights_ = mixer.weights();
  const std::size_t k = weights_.size();
  log_norm_.resize(k);
  precisions_.resize(k);
  factors_.resize(k);
  prec2_.resize(k);
  max_scale_ = 0.0;
  min_scale_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const SymMatrix& y = mixer.atoms()[i];
    const EigenDecomposition eig = eigen_decompose(y);
    // Y symmetric PD: YYᵀ = Y², so precision = V diag(λ⁻²) Vᵀ.
    Vector inv_sq = eig.values.unaryExpr([](double l) { return 1.0 / (l * l); });
    precisions_[i] = eig.vectors * inv_sq.asDiagonal() * eig.vectors.transpose();
    precisions_[i] = 0.5 * (precisions_[i] + precisions_[i].transpose()).eval();
    factors_[i] = y.matrix();
    const double log_det_y = eig.values.array().log().sum();
    log_norm_[i] = std::log(weights_[i]) - 0.5 * dim_ * kLog2Pi - log_det_y;
    max_scale_ = std::max(max_scale_, eig.values.maxCoeff());
    min_scale_ = std::min(min_scale_, eig.values.minCoeff());
    if (dim_ == 2) prec2_[i] = {precisions_[i](0, 0), precisions_[i](0, 1), precisions_[i](1, 1)};
  }
  cumulative_.resize(k);
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

const std::vector<double>& MixtureDensity::variances() const {
  if (dim_ != 1) throw DimensionError("MixtureDensity::variances: only defined for d = 1");
  return variances_;
}

SymMatrix MixtureDensity::covariance_atom(std::size_t k) const {
  if (dim_ == 1) return SymMatrix::scalar(variances_[k]);
  return SymMatrix(Matrix(factors_[k] * factors_[k].transpose()));
}

void MixtureDensity::require_finite(const Vector& x) const {
  if (x.size() != dim_) throw DimensionError("MixtureDensity: point has wrong dimension");
  if (!x.allFinite()) throw DomainError("MixtureDensity: point must be finite");
}

void MixtureDensity::evaluate_1d(double x, double& log_f, double& score) const {
  const double x2 = x * x;
  double top = kNegInf;
  double sum = 0.0;
  double grad = 0.0;
  const std::size_t k = log_norm_.size();
  for (std::size_t i = 0; i < k; ++i) {
    const double t = log_norm_[i] - 0.5 * x2 * inv_var_[i];
    if (t > top) {
      const double rescale = std::exp(top - t);
      sum = sum * rescale + 1.0;
      grad = grad * rescale + inv_var_[i];
      top = t;
    } else {
      const double e = std::exp(t - top);
      sum += e;
      grad += e * inv_var_[i];
    }
  }
  log_f = top + std::log(sum);
  score = x == 0.0 ? 0.0 : -x * grad / sum;
}

void MixtureDensity::evaluate_2d(double x1, double x2, double& log_f, double& s1, double& s2) const {
  double top = kNegInf;
  double sum = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  const std::size_t k = log_norm_.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& p = prec2_[i];
    const double px1 = p[0] * x1 + p[1] * x2;
    const double px2 = p[1] * x1 + p[2] * x2;
    const double t = log_norm_[i] - 0.5 * (x1 * px1 + x2 * px2);
    if (t > top) {
      const double rescale = std::exp(top - t);
      sum = sum * rescale + 1.0;
      g1 = g1 * rescale + px1;
      g2 = g2 * rescale + px2;
      top = t;
    } else {
      const double e = std::exp(t - top);
      sum += e;
      g1 += e * px1;
      g2 += e * px2;
    }
  }
  log_f = top + std::log(sum);
  s1 = -g1 / sum + 0.0;
  s2 = -g2 / sum + 0.0;
}

double MixtureDensity::log_density(double x) const {
  if (dim_ != 1) throw DimensionError("MixtureDensity: scalar evaluation needs d = 1");
  if (!std::isfinite(x)) throw DomainError("MixtureDensity: point must be finite");
  double lf;
  double s;
  evaluate_1d(x, lf, s);
  return lf;
}

double MixtureDensity::density(double x) const { return std::exp(log_density(x)); }

double MixtureDensity::score(double x) const {
  if (dim_ != 1) throw DimensionError("MixtureDensity: scalar evaluation needs d = 1");
  if (!std::isfinite(x)) throw DomainError("MixtureDensity: point must be finite");
  double lf;
  double s;
  evaluate_1d(x, lf, s);
  return s;
}

double MixtureDensity::log_density(const Vector& x) const {
  require_finite(x);
  if (dim_ == 1) return log_density(x(0));
  double top = kNegInf;
  double sum = 0.0;
  for (std::size_t i = 0; i < log_norm_.size(); ++i) {
    const double t = log_norm_[i] - 0.5 * x.dot(precisions_[i] * x);
    if (t > top) {
      sum = sum * std::exp(top - t) + 1.0;
      top = t;
    } else {
      sum += std::exp(t - top);
    }
  }
  return top + std::log(sum);
}

double MixtureDensity::density(const Vector& x) const { return std::exp(log_density(x)); }

Vector MixtureDensity::score(const Vector& x) const {
  require_finite(x);
  if (dim_ == 1) return Vector::Constant(1, score(x(0)));
  double top = kNegInf;
  double sum = 0.0;
  Vector g = Vector::Zero(dim_);
  for (std::size_t i = 0; i < log_norm_.size(); ++i) {
    const Vector px = precisions_[i] * x;
    const double t = log_norm_[i] - 0.5 * x.dot(px);
    if (t > top) {
      const double rescale = std::exp(top - t);
      sum = sum * rescale + 1.0;
      g = g * rescale + px;
      top = t;
    } else {
      const double e = std::exp(t - top);
      sum += e;
      g += e * px;
    }
  }
  Vector out = -g / sum;
  return out + Vector::Zero(dim_);
}

Vector MixtureDensity::gradient(const Vector& x) const { return density(x) * score(x); }

std::size_t MixtureDensity::pick_atom(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

double MixtureDensity::draw_1d(Rng& rng) const {
  if (dim_ != 1) throw DimensionError("MixtureDensity::draw_1d needs d = 1");
  const std::size_t k = pick_atom(rng);
  return scales_[k] * rng.normal();
}

void MixtureDensity::draw(Rng& rng, Vector& out) const {
  out.resize(dim_);
  if (dim_ == 1) {
    out(0) = draw_1d(rng);
    return;
  }
  const std::size_t k = pick_atom(rng);
  Vector z(dim_);
  for (int i = 0; i < dim_; ++i) z(i) = rng.normal();
  out = factors_[k] * z;
}

std::vector<Vector> sample(const MixtureDensity& mix, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out(n);
  for (auto& x : out) mix.draw(rng, x);
  return out;
}

// ---------------------------------------------------------------------------
// Closure under weighted independent sums

namespace {

struct ScalarAtom {
  double variance;
  double weight;
};

void merge_scalar(std::vector<ScalarAtom>& atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const ScalarAtom& a, const ScalarAtom& b) {
    return a.variance < b.variance;
  });
  std::vector<ScalarAtom> merged;
  merged.reserve(atoms.size());
  double head_scale = -1.0;
  for (const auto& a : atoms) {
    if (a.weight == 0.0) continue;
    const double scale = std::sqrt(a.variance);
    if (!merged.empty() && scale - head_scale < 1e-12) {
      merged.back().weight += a.weight;
    } else {
      merged.push_back(a);
      head_scale = scale;
    }
  }
  atoms.swap(merged);
}

struct MatrixAtom {
  Matrix covariance;
  double weight;
};

void merge_matrix(std::vector<MatrixAtom>& atoms) {
  auto lex_less = [](const MatrixAtom& x, const MatrixAtom& y) {
    const Eigen::Index d = x.covariance.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        if (x.covariance(i, j) != y.covariance(i, j)) return x.covariance(i, j) < y.covariance(i, j);
      }
    }
    return false;
  };
  std::stable_sort(atoms.begin(), atoms.end(), lex_less);
  std::vector<MatrixAtom> merged;
  merged.reserve(atoms.size());
  for (auto& a : atoms) {
    if (a.weight == 0.0) continue;
    if (!merged.empty() && (a.covariance - merged.back().covariance).norm() < 1e-12) {
      merged.back().weight += a.weight;
    } else {
      merged.push_back(std::move(a));
    }
  }
  atoms.swap(merged);
}

[[noreturn]] void capacity_exceeded(std::size_t count, std::size_t cap) {
  throw CapacityError("weighted_sum_law: " + std::to_string(count) + " atoms exceed the cap of " +
                      std::to_string(cap) + "; use Monte Carlo atomization of the sum's mixer instead");
}

}  // namespace

MixtureDensity weighted_sum_law(std::span<const MixtureDensity> models, const SimplexPoint& point,
                                std::size_t cap) {
  if (models.empty()) throw DomainError("weighted_sum_law: no models");
  if (models.size() != point.size()) throw DimensionError("weighted_sum_law: one weight per model is required");
  const int d = models.front().dimension();
  for (const auto& m : models) {
    if (m.dimension() != d) throw DimensionError("weighted_sum_law: models differ in dimension");
  }
  const auto& sq = point.squares();

  if (d == 1) {
    std::vector<ScalarAtom> acc{{0.0, 1.0}};
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (sq[i] == 0.0) continue;
      const auto& var = models[i].variances();
      const auto& w = models[i].weights();
      std::vector<ScalarAtom> next;
      next.reserve(acc.size() * var.size());
      for (const auto& a : acc) {
        for (std::size_t k = 0; k < var.size(); ++k) next.push_back({a.variance + sq[i] * var[k], a.weight * w[k]});
        if (next.size() > 4 * cap) {
          merge_scalar(next);
          if (next.size() > cap) capacity_exceeded(next.size(), cap);
        }
      }
      merge_scalar(next);
      if (next.size() > cap) capacity_exceeded(next.size(), cap);
      acc.swap(next);
    }
    std::vector<double> scales;
    std::vector<double> weights;
    scales.reserve(acc.size());
    weights.reserve(acc.size());
    double total = 0.0;
    for (const auto& a : acc) total += a.weight;
    for (const auto& a : acc) {
      scales.push_back(std::sqrt(a.variance));
      weights.push_back(a.weight / total);
    }
    return MixtureDensity(ScalarMixerAtomic(std::move(scales), std::move(weights)));
  }

  std::vector<MatrixAtom> acc{{Matrix::Zero(d, d), 1.0}};
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (sq[i] == 0.0) continue;
    const auto& m = models[i];
    std::vector<MatrixAtom> next;
    next.reserve(acc.size() * m.atom_count());
    for (const auto& a : acc) {
      for (std::size_t k = 0; k < m.atom_count(); ++k) {
        next.push_back({a.covariance + sq[i] * m.covariance_atom(k).matrix(), a.weight * m.weights()[k]});
      }
      if (next.size() > 4 * cap) {
        merge_matrix(next);
        if (next.size() > cap) capacity_exceeded(next.size(), cap);
      }
    }
    merge_matrix(next);
    if (next.size() > cap) capacity_exceeded(next.size(), cap);
    acc.swap(next);
  }
  std::vector<SymMatrix> covs;
  std::vector<double> weights;
  double total = 0.0;
  for (const auto& a : acc) total += a.weight;
  for (const auto& a : acc) {
    covs.emplace_back(a.covariance);
    weights.push_back(a.weight / total);
  }
  return MixtureDensity(MatrixMixerAtomic::from_covariances(covs, std::move(weights)));
}

MixtureDensity blend(const MixtureDensity& first, const MixtureDensity& second, double theta) {
  if (first.dimension() != second.dimension()) throw DimensionError("blend: dimension mismatch");
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("blend: theta must lie in [0, 1]");
  std::vector<double> weights;
  for (double w : first.weights()) weights.push_back(theta * w);
  for (double w : second.weights()) weights.push_back((1.0 - theta) * w);
  if (first.dimension() == 1) {
    std::vector<double> scales;
    for (double v : first.variances()) scales.push_back(std::sqrt(v));
    for (double v : second.variances()) scales.push_back(std::sqrt(v));
    return MixtureDensity(ScalarMixerAtomic(std::move(scales), std::move(weights)));
  }
  std::vector<SymMatrix> atoms = std::get<MatrixMixerAtomic>(first.mixer()).atoms();
  const auto& more = std::get<MatrixMixerAtomic>(second.mixer()).atoms();
  atoms.insert(atoms.end(), more.begin(), more.end());
  return MixtureDensity(MatrixMixerAtomic(std::move(atoms), std::move(weights)));
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json mixture_to_json(const MixtureDensity& mix) {
  nlohmann::json doc = std::visit([](const auto& m) { return mixer_to_json(MixerModel(m)); }, mix.mixer());
  doc["dimension"] = mix.dimension();
  return doc;
}

MixtureDensity mixture_from_json(const nlohmann::json& doc) {
  MixerModel model = mixer_from_json(doc);
  if (std::holds_alternative<StableMixerSpec>(model)) {
    throw ConfigError("mixture document: stable mixers must be atomized before use as a mixture");
  }
  MixtureDensity mix = std::holds_alternative<ScalarMixerAtomic>(model)
                           ? MixtureDensity(std::get<ScalarMixerAtomic>(model))
                           : MixtureDensity(std::get<MatrixMixerAtomic>(model));
  if (doc.contains("dimension") && doc.at("dimension").get<int>() != mix.dimension()) {
    throw ConfigError("mixture document: 'dimension' disagrees with the atoms");
  }
  return mix;
}

}  // namespace mixlab
