#include "mixlab/cltlab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mixlab/config.hpp"
#include "mixlab/error.hpp"
#include "mixlab/infofn.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

void CltConfig::validate() const {
  if (deltas.empty()) throw DomainError("clt: at least one delta required");
  for (double d : deltas) {
    if (!(d > 0.0 && d <= 1.0)) throw DomainError("clt: delta must lie in (0, 1]");
  }
  for (int d : dimensions) {
    if (d < 1) throw DomainError("clt: dimensions must be positive");
  }
  if (scheme == WeightScheme::Equal) {
    if (n_values.empty()) throw DomainError("clt: n_values required for the equal scheme");
    for (std::size_t i = 0; i < n_values.size(); ++i) {
      if (n_values[i] == 0) throw DomainError("clt: n must be positive");
      if (i > 0 && n_values[i] <= n_values[i - 1]) throw DomainError("clt: n_values must be strictly increasing");
    }
  } else if (points.empty()) {
    throw DomainError("clt: explicit scheme needs points");
  }
  if (const auto* s = std::get_if<StableMixerSpec>(&base_model)) s->validate();
  quad.validate();
}

double clt_rate_exponent(double delta) { return delta * delta / ((1.0 + delta) * (1.0 + delta)); }

double clt_predictor(const SimplexPoint& a, double delta) {
  const double q = 2.0 + 2.0 * delta;
  double sum = 0.0;
  for (double s : a.squares()) sum += std::pow(s, 1.0 + delta);  // |aᵢ|^q
  const double norm = std::pow(sum, 1.0 / q);
  return std::pow(norm, 2.0 * delta / (1.0 + delta));
}

namespace {

struct SumLaw {
  MixtureDensity law;
  std::string method;
  std::size_t m = 0;
  std::size_t samples = 0;
};

bool equal_squares(const SimplexPoint& a) {
  const auto& s = a.squares();
  return std::all_of(s.begin(), s.end(), [&](double x) { return std::abs(x - s.front()) <= 1e-15; });
}

/// n i.i.d. two-atom scalar laws with equal weights: the sum's variance is
/// (kσ₁² + (n−k)σ₂²)/n with binomial weight.
MixtureDensity binomial_collapse(const ScalarMixerAtomic& base, std::size_t n) {
  const double v1 = base.scales()[0] * base.scales()[0];
  const double v2 = base.scales()[1] * base.scales()[1];
  const double lw1 = std::log(base.weights()[0]);
  const double lw2 = std::log(base.weights()[1]);
  const double nn = static_cast<double>(n);
  std::vector<double> scales;
  std::vector<double> weights;
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double lw = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) + kk * lw1 +
                      (nn - kk) * lw2;
    const double w = std::exp(lw);
    if (w == 0.0) continue;
    scales.push_back(std::sqrt((kk * v1 + (nn - kk) * v2) / nn));
    weights.push_back(w);
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return MixtureDensity(ScalarMixerAtomic(std::move(scales), std::move(weights)));
}

/// m equal-weight atoms of the mixer (Σ aᵢ² YᵢYᵢᵀ)^{1/2}; atom j uses its own
/// derived seed so doubling m reuses the first atoms.
MixtureDensity atomized_sum(const MixerModel& base, const SimplexPoint& a, std::size_t m, std::uint64_t seed) {
  const std::size_t n = a.size();
  const bool matrix = std::holds_alternative<MatrixMixerAtomic>(base);
  std::vector<double> scales(matrix ? 0 : m);
  std::vector<SymMatrix> covs(matrix ? m : 0);
  parallel::for_each(m, [&](std::size_t j) {
    const MixerDraws draws = sample_mixer(base, n, derive_seed(seed, j));
    if (const auto* s = std::get_if<std::vector<double>>(&draws)) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += a.squares()[i] * (*s)[i] * (*s)[i];
      scales[j] = std::sqrt(v);
    } else {
      const auto& ys = std::get<std::vector<SymMatrix>>(draws);
      Matrix acc = Matrix::Zero(ys.front().dim(), ys.front().dim());
      for (std::size_t i = 0; i < n; ++i) acc += a.squares()[i] * ys[i].matrix() * ys[i].matrix();
      covs[j] = SymMatrix(acc);
    }
  });
  const std::vector<double> weights(m, 1.0 / static_cast<double>(m));
  if (matrix) return MixtureDensity(MatrixMixerAtomic::from_covariances(covs, weights));
  return MixtureDensity(ScalarMixerAtomic(std::move(scales), weights));
}

Deviation deviation_of(const MixtureDensity& law, const CltConfig& config, std::uint64_t seed) {
  const SymMatrix cov = covariance(law);
  const FisherMatrixEstimate fisher = fisher_matrix(law, config.quad, {config.mc_samples, seed});
  const SymMatrix root = sqrt_psd(cov);
  const SymMatrix standardized(root.matrix() * fisher.matrix.matrix() * root.matrix());
  const SymMatrix diff = standardized - SymMatrix::identity(law.dimension());
  Deviation out;
  out.d = law.dimension();
  out.deviation = op_norm(diff);
  out.min_eigenvalue = min_eigenvalue(diff);
  out.error_bound = op_norm(cov) * fisher.error_bound;
  out.atoms = law.atom_count();
  if (fisher.method == Method::MonteCarlo) out.samples = fisher.samples_used;
  return out;
}

Deviation atomized_deviation(const CltConfig& config, const SimplexPoint& a, std::uint64_t seed) {
  if (config.atomization_m == 0) {
    throw CapacityError("clt: exact sum law unavailable; set atomization m for Monte Carlo atomization");
  }
  constexpr int kMaxDoublings = 6;
  std::size_t m = config.atomization_m;
  Deviation prev = deviation_of(atomized_sum(config.base_model, a, m, seed), config, seed);
  prev.m = m;
  for (int k = 0; k < kMaxDoublings; ++k) {
    m *= 2;
    Deviation next = deviation_of(atomized_sum(config.base_model, a, m, seed), config, seed);
    next.m = m;
    const bool settled = std::abs(next.deviation - prev.deviation) < 0.1 * std::max(prev.deviation, 1e-300);
    prev = next;
    if (settled) break;
  }
  prev.method = "atomized";
  prev.samples += prev.m * a.size();
  return prev;
}

}  // namespace

Deviation standardized_fisher_deviation(const CltConfig& config, const SimplexPoint& a, int d) {
  const std::uint64_t seed = derive_seed(derive_seed(config.seed, a.size()), static_cast<std::uint64_t>(d));
  const std::size_t n = a.size();
  Deviation out;
  if (const auto* scalar = std::get_if<ScalarMixerAtomic>(&config.base_model)) {
    if (scalar->size() <= 2 && equal_squares(a)) {
      const MixtureDensity law =
          scalar->size() == 1 ? MixtureDensity(*scalar) : binomial_collapse(*scalar, n);
      out = deviation_of(law, config, seed);
      out.method = "binomial";
    } else {
      try {
        const MixtureDensity base(*scalar);
        const std::vector<MixtureDensity> copies(n, base);
        out = deviation_of(weighted_sum_law(copies, a, config.atom_cap), config, seed);
        out.method = "exact";
      } catch (const CapacityError&) {
        out = atomized_deviation(config, a, seed);
      }
    }
  } else if (const auto* matrix = std::get_if<MatrixMixerAtomic>(&config.base_model)) {
    try {
      const MixtureDensity base(*matrix);
      const std::vector<MixtureDensity> copies(n, base);
      out = deviation_of(weighted_sum_law(copies, a, config.atom_cap), config, seed);
      out.method = "exact";
    } catch (const CapacityError&) {
      out = atomized_deviation(config, a, seed);
    }
    d = out.d;
  } else {
    out = atomized_deviation(config, a, seed);
  }
  out.n = n;
  if (d > 1 && out.d == 1) {
    // Independent identical coordinates: the standardized matrix is diagonal
    // with every entry equal to the scalar one.
    out.d = d;
    out.method = "product-" + out.method;
  }
  return out;
}

std::vector<CltRow> run_clt(const CltConfig& config) {
  config.validate();
  std::vector<SimplexPoint> points;
  if (config.scheme == WeightScheme::Equal) {
    for (std::size_t n : config.n_values) points.push_back(SimplexPoint::equal(n));
  } else {
    for (const auto& sq : config.points) points.push_back(SimplexPoint::from_squares(sq));
  }
  std::vector<int> dims = config.dimensions;
  if (const auto* matrix = std::get_if<MatrixMixerAtomic>(&config.base_model)) {
    dims = {static_cast<int>(matrix->dim())};
  }
  struct Cell {
    int d;
    std::size_t point;
  };
  std::vector<Cell> cells;
  for (int d : dims) {
    for (std::size_t i = 0; i < points.size(); ++i) cells.push_back({d, i});
  }
  std::vector<Deviation> devs(cells.size());
  parallel::for_each(cells.size(), [&](std::size_t c) {
    devs[c] = standardized_fisher_deviation(config, points[cells[c].point], cells[c].d);
  });
  std::vector<CltRow> rows;
  const char* scheme = config.scheme == WeightScheme::Equal ? "equal" : "explicit";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (double delta : config.deltas) {
      rows.push_back({devs[c], delta, scheme, clt_predictor(points[cells[c].point], delta)});
    }
  }
  return rows;
}

RateFit fit_rate(const std::vector<CltRow>& rows) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : rows) {
    if (r.dev.deviation > r.dev.error_bound && r.dev.deviation > 0.0) {
      xs.push_back(std::log(static_cast<double>(r.dev.n)));
      ys.push_back(std::log(r.dev.deviation));
    }
  }
  if (xs.size() < 3) throw DomainError("fit_rate: fewer than three rows above the error floor");
  const double k = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_rate: rows need at least two distinct n");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / k);
  fit.points_used = xs.size();
  return fit;
}

ConstantFit fit_constant(const std::vector<CltRow>& rows) {
  if (rows.empty()) throw DomainError("fit_constant: no rows");
  std::vector<const CltRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const CltRow* x, const CltRow* y) { return x->dev.n < y->dev.n; });
  auto ratio = [](const CltRow& r) {
    return r.dev.deviation / (std::pow(std::log(r.dev.d + 1.0), r.delta) * r.predictor);
  };
  ConstantFit fit;
  double first_half = 0.0;
  const std::size_t half = (sorted.size() + 1) / 2;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double c = ratio(*sorted[i]);
    fit.constant = std::max(fit.constant, c);
    if (i < half) first_half = std::max(first_half, c);
  }
  fit.stability_ratio = first_half > 0.0 ? fit.constant / first_half : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------

double type_constant(const TypeCheckSpec& spec) {
  if (!(spec.delta > 0.0 && spec.delta <= 1.0)) throw DomainError("type check: delta must lie in (0, 1]");
  if (spec.norm == TypeNorm::Operator) {
    return std::exp(1.0 + spec.delta) * std::pow(std::log(spec.d + 1.0), spec.delta);
  }
  if (spec.p < 1.0 + spec.delta) {
    throw DomainError("type check: Schatten p must be at least 1 + delta");
  }
  return spec.p <= 2.0 ? 1.0 : std::pow(spec.p - 1.0, spec.delta);
}

namespace {

double type_norm(const Matrix& s, double p, TypeNorm norm) {
  if (norm == TypeNorm::Schatten && p == 2.0) return s.norm();
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.transpose() * s, Eigen::EigenvaluesOnly);
  Vector sv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  if (norm == TypeNorm::Operator) return sv.maxCoeff();
  return schatten_norm_from_singular_values(sv, p);
}

}  // namespace

double rademacher_ratio(const std::vector<Matrix>& v, double p, double delta, TypeNorm norm) {
  const std::size_t n = v.size();
  if (n == 0) throw DomainError("rademacher_ratio: empty tuple");
  if (n > 20) throw CapacityError("rademacher_ratio: exhaustive enumeration limited to n <= 20; use sampling");
  const double q = 1.0 + delta;
  double rhs = 0.0;
  for (const auto& m : v) rhs += std::pow(type_norm(m, p, norm), q);
  // ε₁ = +1 fixed; the mirror pattern −ε has the same norm. Gray code order.
  Matrix sum = Matrix::Zero(v.front().rows(), v.front().cols());
  for (const auto& m : v) sum += m;
  std::vector<int> eps(n, 1);
  double total = std::pow(type_norm(sum, p, norm), q);
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  for (std::uint64_t g = 1; g < half; ++g) {
    const std::size_t j = 1 + static_cast<std::size_t>(std::countr_zero(g));
    sum -= (2.0 * eps[j]) * v[j];
    eps[j] = -eps[j];
    total += std::pow(type_norm(sum, p, norm), q);
  }
  return (total / static_cast<double>(half)) / rhs;
}

TypeCheckReport check_rademacher_type(const TypeCheckSpec& spec) {
  if (spec.n == 0 || spec.d < 1 || spec.trials == 0) throw DomainError("type check: n, d and trials must be positive");
  if (spec.n > 20) throw CapacityError("type check: exhaustive enumeration limited to n <= 20; use sampling");
  TypeCheckReport out;
  out.spec = spec;
  out.constant = type_constant(spec);
  out.sign_patterns = std::size_t{1} << spec.n;
  std::vector<double> ratios(spec.trials);
  parallel::for_each(spec.trials, [&](std::size_t t) {
    Rng rng(derive_seed(spec.seed, t));
    std::vector<Matrix> v(spec.n, Matrix(spec.d, spec.d));
    for (auto& m : v) {
      const double scale = 0.25 * std::exp(std::log(16.0) * rng.uniform());
      for (int i = 0; i < spec.d; ++i) {
        for (int j = 0; j < spec.d; ++j) m(i, j) = scale * rng.normal();
      }
    }
    ratios[t] = rademacher_ratio(v, spec.p, spec.delta, spec.norm) / out.constant;
  });
  out.worst_ratio = *std::max_element(ratios.begin(), ratios.end());
  out.pass = out.worst_ratio <= 1.0 + 1e-12;
  return out;
}

MomentReport moment_condition_report(const MixerModel& model, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("moment report: delta must lie in (0, 1]");
  const double q = 1.0 + delta;
  MomentReport out;
  if (const auto* s = std::get_if<ScalarMixerAtomic>(&model)) {
    for (std::size_t k = 0; k < s->size(); ++k) {
      out.pos_moment += s->weights()[k] * std::pow(s->scales()[k], 2.0 * q);
      out.neg_moment += s->weights()[k] * std::pow(s->scales()[k], -2.0 * q);
    }
    out.method = "exact";
  } else if (const auto* m = std::get_if<MatrixMixerAtomic>(&model)) {
    for (std::size_t k = 0; k < m->size(); ++k) {
      const auto eig = eigen_decompose(m->atoms()[k]);
      out.pos_moment += m->weights()[k] * std::pow(eig.values.maxCoeff(), 2.0 * q);
      out.neg_moment += m->weights()[k] * std::pow(eig.values.minCoeff(), -2.0 * q);
    }
    out.method = "exact";
  } else {
    const auto& spec = std::get<StableMixerSpec>(model);
    out.pos_moment = stable_mixer_moment(spec, 2.0 * q);
    out.neg_moment = stable_mixer_moment(spec, -2.0 * q);
    out.method = "closed-form";
  }
  out.admitted = std::isfinite(out.pos_moment) && std::isfinite(out.neg_moment);
  return out;
}

namespace {

nlohmann::json finite_or_flag(double v) {
  if (std::isfinite(v)) return v;
  return "inf";
}

}  // namespace

nlohmann::json to_json(const TypeCheckReport& r) {
  return {{"p", r.spec.p},
          {"delta", r.spec.delta},
          {"n", r.spec.n},
          {"d", r.spec.d},
          {"trials", r.spec.trials},
          {"seed", r.spec.seed},
          {"norm", r.spec.norm == TypeNorm::Schatten ? "schatten" : "operator"},
          {"constant", r.constant},
          {"worst_ratio", r.worst_ratio},
          {"sign_patterns", r.sign_patterns},
          {"exhaustive", r.exhaustive},
          {"pass", r.pass}};
}

nlohmann::json to_json(const MomentReport& r) {
  return {{"pos_moment", finite_or_flag(r.pos_moment)},
          {"neg_moment", finite_or_flag(r.neg_moment)},
          {"pos_finite", std::isfinite(r.pos_moment)},
          {"neg_finite", std::isfinite(r.neg_moment)},
          {"admitted", r.admitted},
          {"method", r.method}};
}

CltConfig clt_config_from_json(const nlohmann::json& doc) {
  reject_unknown_keys(doc,
                      {"model", "delta", "dimension", "scheme", "n_values", "points", "m", "mc_samples", "seed",
                       "atom_cap", "quad"},
                      "clt config");
  CltConfig c;
  try {
    if (!doc.contains("model")) throw ConfigError("clt config: missing key 'model'");
    c.base_model = mixer_from_json(doc.at("model"));
    auto number_list = [&](const char* key, auto& out) {
      if (!doc.contains(key)) return;
      const auto& node = doc.at(key);
      out.clear();
      if (node.is_array()) {
        for (const auto& v : node) out.push_back(v.get<typename std::decay_t<decltype(out)>::value_type>());
      } else {
        out.push_back(node.get<typename std::decay_t<decltype(out)>::value_type>());
      }
    };
    number_list("delta", c.deltas);
    number_list("dimension", c.dimensions);
    number_list("n_values", c.n_values);
    if (doc.contains("scheme")) {
      const auto s = doc.at("scheme").get<std::string>();
      if (s == "equal") {
        c.scheme = WeightScheme::Equal;
      } else if (s == "explicit") {
        c.scheme = WeightScheme::Explicit;
      } else {
        throw ConfigError("clt config: scheme must be 'equal' or 'explicit'");
      }
    }
    if (doc.contains("points")) c.points = doc.at("points").get<std::vector<std::vector<double>>>();
    if (doc.contains("m")) c.atomization_m = doc.at("m").get<std::size_t>();
    if (doc.contains("mc_samples")) c.mc_samples = doc.at("mc_samples").get<std::size_t>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("atom_cap")) c.atom_cap = doc.at("atom_cap").get<std::size_t>();
    if (doc.contains("quad")) c.quad = quad_spec_from_json(doc.at("quad"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("clt config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string clt_rows_to_csv(const std::vector<CltRow>& rows) {
  std::ostringstream os;
  os << "n,d,delta,scheme,deviation,error_bound,predictor,method,m,samples\n";
  for (const auto& r : rows) {
    os << r.dev.n << ',' << r.dev.d << ',' << format_double(r.delta) << ',' << r.scheme << ','
       << format_double(r.dev.deviation) << ',' << format_double(r.dev.error_bound) << ','
       << format_double(r.predictor) << ',' << r.dev.method << ',' << r.dev.m << ',' << r.dev.samples << '\n';
  }
  return os.str();
}

}  // namespace mixlab
