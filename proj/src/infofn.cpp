#include "mixlab/infofn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mixlab/error.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

const char* to_string(Method method) { return method == Method::Quadrature ? "quadrature" : "monte-carlo"; }

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

using quad_detail::Values;

double upper_normal_tail(double r) { return 0.5 * std::erfc(r / std::numbers::sqrt2); }

double normal_pdf(double r) { return std::exp(-0.5 * r * r) / std::sqrt(2.0 * std::numbers::pi); }

/// Bound on ∫_{|x|>R} φ_d(u)(c + |u|²/2) for the standardized radius r = R/σ_max
/// (d = 1: both tails; d = 2: outside the inscribed disk).
double gaussian_tail_moment(int d, double r, double c) {
  if (d == 1) return 2.0 * (std::abs(c) * upper_normal_tail(r) + 0.5 * (r * normal_pdf(r) + upper_normal_tail(r)));
  const double e = std::exp(-0.5 * r * r);
  return std::abs(c) * e + 0.5 * (r * r + 2.0) * e;
}

struct Domain {
  double radius;
  double fine;
};

Domain domain_for(const MixtureDensity& mix, const QuadSpec& spec) {
  spec.validate();
  return {spec.tail_radius_multiplier * mix.max_scale(), mix.min_scale() / 4.0};
}

/// −log f(x) ≤ c + |x|²/(2σ_max²) beyond σ_max, with c from the widest atom.
double tail_log_constant(const MixtureDensity& mix) {
  const int d = mix.dimension();
  double w_widest = 0.0;
  if (d == 1) {
    w_widest = mix.weights().back();
  } else {
    double widest = -1.0;
    for (std::size_t k = 0; k < mix.atom_count(); ++k) {
      const double s = op_norm(mix.covariance_atom(k));
      if (s > widest) {
        widest = s;
        w_widest = mix.weights()[k];
      }
    }
  }
  return -std::log(w_widest) + 0.5 * d * kLog2Pi + d * std::log(mix.max_scale());
}

/// Integrates an even integrand g(x) over ℝ (d = 1) or ℝ² (d = 2) using the
/// half-space x₁ ≥ 0 and doubling.
template <std::size_t N, class G1, class G2>
quad_detail::MultiResult<N> integrate_even(const MixtureDensity& mix, const QuadSpec& spec, G1&& g1, G2&& g2) {
  const Domain dom = domain_for(mix, spec);
  QuadSpec half = spec;
  half.abs_tol = 0.5 * spec.abs_tol;
  quad_detail::MultiResult<N> res;
  if (mix.dimension() == 1) {
    const auto breaks = quad_detail::half_ladder(dom.radius, dom.fine);
    res = quad_detail::adaptive<N>(g1, breaks, half);
  } else {
    const auto outer = quad_detail::half_ladder(dom.radius, dom.fine);
    const auto inner = quad_detail::symmetric_ladder(dom.radius, dom.fine);
    res = quad_detail::adaptive_2d<N>(g2, outer, inner, half);
  }
  for (auto& v : res.value) v *= 2.0;
  res.error_bound *= 2.0;
  return res;
}

// ---------------------------------------------------------------------------
// Monte Carlo machinery: samples are split into a fixed number of batches,
// each with its own derived seed, so results do not depend on thread count.

constexpr std::size_t kBatches = 64;

struct Batch {
  std::size_t begin;
  std::size_t count;
};

std::vector<Batch> batches_for(std::size_t n) {
  if (n == 0) throw DomainError("Monte Carlo: sample count must be positive");
  const std::size_t b = std::min(kBatches, n);
  std::vector<Batch> out(b);
  std::size_t start = 0;
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t count = n / b + (i < n % b ? 1 : 0);
    out[i] = {start, count};
    start += count;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

SymMatrix covariance(const MixtureDensity& mix) {
  const int d = mix.dimension();
  if (d == 1) {
    double v = 0.0;
    for (std::size_t k = 0; k < mix.atom_count(); ++k) v += mix.weights()[k] * mix.variances()[k];
    return SymMatrix::scalar(v);
  }
  Matrix acc = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < mix.atom_count(); ++k) acc += mix.weights()[k] * mix.covariance_atom(k).matrix();
  return SymMatrix(acc);
}

SymMatrix mean_inverse_covariance(const MixtureDensity& mix) {
  const int d = mix.dimension();
  if (d == 1) {
    double v = 0.0;
    for (std::size_t k = 0; k < mix.atom_count(); ++k) v += mix.weights()[k] / mix.variances()[k];
    return SymMatrix::scalar(v);
  }
  Matrix acc = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < mix.atom_count(); ++k) {
    acc += mix.weights()[k] * inverse_pd(mix.covariance_atom(k)).matrix();
  }
  return SymMatrix(acc);
}

InfoEstimate entropy(const MixtureDensity& mix, const QuadSpec& spec, const McSpec& mc) {
  if (mix.dimension() > 2) return entropy_monte_carlo(mix, mc);
  auto g1 = [&](double x) {
    double lf;
    double s;
    mix.evaluate_1d(x, lf, s);
    return Values<1>{-std::exp(lf) * lf};
  };
  auto g2 = [&](double x1, double x2) {
    double lf;
    double s1;
    double s2;
    mix.evaluate_2d(x1, x2, lf, s1, s2);
    return Values<1>{-std::exp(lf) * lf};
  };
  const auto res = integrate_even<1>(mix, spec, g1, g2);
  const double r = spec.tail_radius_multiplier;
  const double tail = gaussian_tail_moment(mix.dimension(), r, tail_log_constant(mix));
  return {res.value[0], res.error_bound + tail, Method::Quadrature, 0};
}

InfoEstimate entropy_monte_carlo(const MixtureDensity& mix, const McSpec& mc) {
  const int d = mix.dimension();
  const double mean_var = covariance(mix).matrix().trace() / d;
  const auto batches = batches_for(mc.samples);
  struct Sums {
    double l = 0, c = 0, ll = 0, cc = 0, lc = 0;
  };
  std::vector<Sums> sums(batches.size());
  parallel::for_each(batches.size(), [&](std::size_t b) {
    Rng rng(derive_seed(mc.seed, b));
    Vector x(d);
    Sums s;
    for (std::size_t i = 0; i < batches[b].count; ++i) {
      mix.draw(rng, x);
      const double l = -mix.log_density(x);
      const double c = 0.5 * x.squaredNorm() / mean_var;
      s.l += l;
      s.c += c;
      s.ll += l * l;
      s.cc += c * c;
      s.lc += l * c;
    }
    sums[b] = s;
  });
  Sums t;
  for (const auto& s : sums) {
    t.l += s.l;
    t.c += s.c;
    t.ll += s.ll;
    t.cc += s.cc;
    t.lc += s.lc;
  }
  const double n = static_cast<double>(mc.samples);
  const double ml = t.l / n;
  const double mcv = t.c / n;
  const double var_l = t.ll / n - ml * ml;
  const double var_c = t.cc / n - mcv * mcv;
  const double cov_lc = t.lc / n - ml * mcv;
  const double beta = var_c > 0.0 ? cov_lc / var_c : 0.0;
  // E[|X|²/(2s̄²)] = d/2 exactly.
  const double value = ml - beta * (mcv - 0.5 * d);
  const double resid_var = std::max(0.0, var_l - 2.0 * beta * cov_lc + beta * beta * var_c);
  return {value, kCiQuantile * std::sqrt(resid_var / n), Method::MonteCarlo, mc.samples};
}

InfoEstimate renyi_entropy(const MixtureDensity& mix, double alpha, const QuadSpec& spec, const McSpec& mc) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("renyi_entropy: alpha must be positive, got " + std::to_string(alpha));
  }
  if (alpha == 1.0) return entropy(mix, spec, mc);
  if (mix.dimension() > 2) return renyi_entropy_monte_carlo(mix, alpha, mc);
  auto g1 = [&](double x) {
    double lf;
    double s;
    mix.evaluate_1d(x, lf, s);
    return Values<1>{std::exp(alpha * lf)};
  };
  auto g2 = [&](double x1, double x2) {
    double lf;
    double s1;
    double s2;
    mix.evaluate_2d(x1, x2, lf, s1, s2);
    return Values<1>{std::exp(alpha * lf)};
  };
  const auto res = integrate_even<1>(mix, spec, g1, g2);
  const int d = mix.dimension();
  const double sigma = mix.max_scale();
  // f^α ≤ φ_σmax^α beyond σmax; its tail mass outside radius R.
  const double r = spec.tail_radius_multiplier;
  const double peak = std::pow(std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * d), alpha);
  const double spread = std::pow(2.0 * std::numbers::pi * sigma * sigma / alpha, 0.5 * d);
  const double tail_mass = d == 1 ? 2.0 * upper_normal_tail(r * std::sqrt(alpha)) : std::exp(-0.5 * alpha * r * r);
  const double integral_err = res.error_bound + peak * spread * tail_mass;
  const double integral = res.value[0];
  const double value = std::log(integral) / (1.0 - alpha);
  return {value, integral_err / (integral * std::abs(1.0 - alpha)), Method::Quadrature, 0};
}

InfoEstimate renyi_entropy_monte_carlo(const MixtureDensity& mix, double alpha, const McSpec& mc) {
  if (!(alpha > 0.0) || alpha == 1.0) throw DomainError("renyi_entropy_monte_carlo: alpha must be positive and != 1");
  const int d = mix.dimension();
  const auto batches = batches_for(mc.samples);
  std::vector<std::array<double, 2>> sums(batches.size());
  parallel::for_each(batches.size(), [&](std::size_t b) {
    Rng rng(derive_seed(mc.seed, b));
    Vector x(d);
    double s = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < batches[b].count; ++i) {
      mix.draw(rng, x);
      const double v = std::exp((alpha - 1.0) * mix.log_density(x));
      s += v;
      ss += v * v;
    }
    sums[b] = {s, ss};
  });
  double s = 0.0;
  double ss = 0.0;
  for (const auto& v : sums) {
    s += v[0];
    ss += v[1];
  }
  const double n = static_cast<double>(mc.samples);
  const double mean = s / n;
  const double var = std::max(0.0, ss / n - mean * mean);
  const double half_width = kCiQuantile * std::sqrt(var / n);
  return {std::log(mean) / (1.0 - alpha), half_width / (mean * std::abs(1.0 - alpha)), Method::MonteCarlo,
          mc.samples};
}

FisherMatrixEstimate fisher_matrix(const MixtureDensity& mix, const QuadSpec& spec, const McSpec& mc) {
  const int d = mix.dimension();
  if (d > 2) return fisher_matrix_monte_carlo(mix, mc);
  const double sigma_min = mix.min_scale();
  const double r = spec.tail_radius_multiplier;
  // |score(x)| ≤ |x|/σ_min², f ≤ φ_σmax beyond σmax.
  const double tail_factor = std::pow(mix.max_scale() / (sigma_min * sigma_min), 2);
  const double tail = tail_factor * 2.0 * gaussian_tail_moment(d, r, 0.0);
  if (d == 1) {
    auto g1 = [&](double x) {
      double lf;
      double s;
      mix.evaluate_1d(x, lf, s);
      return Values<1>{std::exp(lf) * s * s};
    };
    auto unused = [](double, double) { return Values<1>{0.0}; };
    const auto res = integrate_even<1>(mix, spec, g1, unused);
    return {SymMatrix::scalar(res.value[0]), res.error_bound + tail, Method::Quadrature, 0};
  }
  auto unused = [](double) { return Values<3>{0.0, 0.0, 0.0}; };
  auto g2 = [&](double x1, double x2) {
    double lf;
    double s1;
    double s2;
    mix.evaluate_2d(x1, x2, lf, s1, s2);
    const double f = std::exp(lf);
    return Values<3>{f * s1 * s1, f * s1 * s2, f * s2 * s2};
  };
  const auto res = integrate_even<3>(mix, spec, unused, g2);
  Matrix m(2, 2);
  m << res.value[0], res.value[1], res.value[1], res.value[2];
  // Entry errors are each ≤ error_bound; ‖E‖_op ≤ ‖E‖_F ≤ 2·max|Eᵢⱼ|.
  return {SymMatrix(m), 2.0 * (res.error_bound + tail), Method::Quadrature, 0};
}

FisherMatrixEstimate fisher_matrix_monte_carlo(const MixtureDensity& mix, const McSpec& mc) {
  const int d = mix.dimension();
  const auto batches = batches_for(mc.samples);
  std::vector<Matrix> sums(batches.size());
  parallel::for_each(batches.size(), [&](std::size_t b) {
    Rng rng(derive_seed(mc.seed, b));
    Vector x(d);
    Matrix acc = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < batches[b].count; ++i) {
      mix.draw(rng, x);
      const Vector s = mix.score(x);
      acc.noalias() += s * s.transpose();
    }
    sums[b] = acc;
  });
  Matrix total = Matrix::Zero(d, d);
  for (const auto& s : sums) total += s;
  const double n = static_cast<double>(mc.samples);
  const Matrix mean = total / n;
  // Batch jackknife of the operator-norm deviation.
  double jack = 0.0;
  const std::size_t nb = batches.size();
  if (nb > 1) {
    for (std::size_t b = 0; b < nb; ++b) {
      const Matrix loo = (total - sums[b]) / (n - static_cast<double>(batches[b].count));
      const double dev = op_norm(SymMatrix(Matrix(loo - mean)));
      jack += dev * dev;
    }
    jack = std::sqrt(static_cast<double>(nb - 1) / static_cast<double>(nb) * jack);
  }
  return {SymMatrix(mean), kCiQuantile * jack, Method::MonteCarlo, mc.samples};
}

InfoEstimate fisher_information(const MixtureDensity& mix, const QuadSpec& spec, const McSpec& mc) {
  const auto est = fisher_matrix(mix, spec, mc);
  const double trace = est.matrix.matrix().trace();
  return {trace, est.error_bound * mix.dimension(), est.method, est.samples_used};
}

nlohmann::json to_json(const InfoEstimate& e) {
  return {{"value", e.value}, {"error_bound", e.error_bound}, {"method", to_string(e.method)},
          {"samples_used", e.samples_used}};
}

nlohmann::json to_json(const FisherMatrixEstimate& e) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < e.matrix.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < e.matrix.dim(); ++j) row.push_back(e.matrix(i, j));
    rows.push_back(row);
  }
  return {{"value", rows}, {"error_bound", e.error_bound}, {"method", to_string(e.method)},
          {"samples_used", e.samples_used}};
}

}  // namespace mixlab
