#include "mixlab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixlab/error.hpp"
#include "mixlab/matana.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab {

bool CheckReport::all_pass() const {
  return pass && std::all_of(companions.begin(), companions.end(), [](const CheckReport& c) { return c.all_pass(); });
}

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json doc = {{"name", r.name},
                        {"instances_tested", r.instances_tested},
                        {"worst_margin", r.worst_margin},
                        {"worst_raw_margin", r.worst_raw_margin},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass},
                        {"witnesses", r.witnesses}};
  if (r.exploratory) doc["exploratory"] = true;
  if (!r.companions.empty()) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : r.companions) comps.push_back(to_json(c));
    doc["companions"] = comps;
  }
  return doc;
}

MarginTracker::MarginTracker(std::string name, double tolerance) {
  r_.name = std::move(name);
  r_.tolerance = tolerance;
  r_.worst_margin = std::numeric_limits<double>::infinity();
  r_.worst_raw_margin = std::numeric_limits<double>::infinity();
}

void MarginTracker::add(double raw, double budget, const nlohmann::json& witness) {
  ++r_.instances_tested;
  any_ = true;
  const double budgeted = raw + std::abs(budget);
  r_.worst_margin = std::min(r_.worst_margin, budgeted);
  r_.worst_raw_margin = std::min(r_.worst_raw_margin, raw);
  if (!(budgeted >= -r_.tolerance)) {
    r_.pass = false;
    if (r_.witnesses.size() < kMaxWitnesses) {
      nlohmann::json w = witness.is_null() ? nlohmann::json::object() : witness;
      w["margin"] = raw;
      w["budget"] = std::abs(budget);
      r_.witnesses.push_back(std::move(w));
    }
  }
}

CheckReport MarginTracker::report() const {
  CheckReport out = r_;
  if (!any_) {
    out.worst_margin = 0.0;
    out.worst_raw_margin = 0.0;
  }
  return out;
}

CheckReport merge_reports(const std::vector<CheckReport>& reports) {
  if (reports.empty()) throw DomainError("merge_reports: nothing to merge");
  CheckReport out = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const CheckReport& r = reports[i];
    out.instances_tested += r.instances_tested;
    out.worst_margin = std::min(out.worst_margin, r.worst_margin);
    out.worst_raw_margin = std::min(out.worst_raw_margin, r.worst_raw_margin);
    out.pass = out.pass && r.pass;
    out.exploratory = out.exploratory || r.exploratory;
    for (const auto& w : r.witnesses) {
      if (out.witnesses.size() < kMaxWitnesses) out.witnesses.push_back(w);
    }
  }
  for (std::size_t c = 0; c < out.companions.size(); ++c) {
    std::vector<CheckReport> parts;
    for (const auto& r : reports) {
      if (c < r.companions.size()) parts.push_back(r.companions[c]);
    }
    out.companions[c] = merge_reports(parts);
  }
  return out;
}

CheckReport group_reports(std::string name, std::vector<CheckReport> parts, double tolerance) {
  CheckReport out;
  out.name = std::move(name);
  out.tolerance = tolerance;
  out.worst_margin = std::numeric_limits<double>::infinity();
  out.worst_raw_margin = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    out.instances_tested = std::max(out.instances_tested, p.instances_tested);
    out.worst_margin = std::min(out.worst_margin, p.worst_margin);
    out.worst_raw_margin = std::min(out.worst_raw_margin, p.worst_raw_margin);
    out.pass = out.pass && p.pass;
  }
  if (parts.empty()) {
    out.worst_margin = 0.0;
    out.worst_raw_margin = 0.0;
  }
  out.companions = std::move(parts);
  return out;
}

InfoEstimate entropy_of_order(const MixtureDensity& mix, double alpha, const QuadSpec& spec) {
  return alpha == 1.0 ? entropy(mix, spec) : renyi_entropy(mix, alpha, spec);
}

namespace {

void require_scalar(const MixtureDensity& m, const char* what) {
  if (m.dimension() != 1) throw DimensionError(std::string(what) + ": scalar models required");
}

std::vector<double> uniform_grid(std::size_t points) {
  if (points < 2) throw DomainError("grid needs at least two points");
  std::vector<double> t(points);
  for (std::size_t k = 0; k < points; ++k) t[k] = static_cast<double>(k) / static_cast<double>(points - 1);
  t.back() = 1.0;
  return t;
}

/// Squares with entries below 1e-10 clamped to zero and renormalized.
SimplexPoint clamped_point(std::vector<double> squares) {
  for (auto& s : squares) {
    if (s < 1e-10) s = 0.0;
  }
  const double total = std::accumulate(squares.begin(), squares.end(), 0.0);
  for (auto& s : squares) s /= total;
  return SimplexPoint::from_squares(std::move(squares));
}

SimplexPoint two_point(double t) { return clamped_point({t, 1.0 - t}); }

InfoEstimate sum_entropy(const std::vector<MixtureDensity>& models, const std::vector<double>& squares, double alpha,
                         const QuadSpec& spec) {
  return entropy_of_order(weighted_sum_law(models, clamped_point(squares)), alpha, spec);
}

nlohmann::json vec_json(const std::vector<double>& v) { return nlohmann::json(v); }

}  // namespace

CheckReport check_entropy_concavity_t(const MixtureDensity& model1, const MixtureDensity& model2,
                                      std::size_t t_grid, const QuadSpec& spec, double tolerance,
                                      double epi_tolerance) {
  require_scalar(model1, "check_entropy_concavity_t");
  require_scalar(model2, "check_entropy_concavity_t");
  if (t_grid < 3) throw DomainError("check_entropy_concavity_t: t_grid must be at least 3");
  const auto t = uniform_grid(t_grid);
  const std::vector<MixtureDensity> models{model1, model2};
  std::vector<InfoEstimate> g(t.size());
  parallel::for_each(t.size(), [&](std::size_t k) {
    g[k] = entropy(weighted_sum_law(models, two_point(t[k])), spec);
  });

  const double h = 1.0 / static_cast<double>(t_grid - 1);
  MarginTracker concavity("entropy_concavity_t", tolerance);
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double second = (g[k - 1].value - 2.0 * g[k].value + g[k + 1].value) / (h * h);
    const double budget = (g[k - 1].error_bound + 2.0 * g[k].error_bound + g[k + 1].error_bound) / (h * h);
    concavity.add(-second, budget, {{"t", t[k]}});
  }
  MarginTracker epi("epi", epi_tolerance);
  const InfoEstimate& h1 = g.back();
  const InfoEstimate& h0 = g.front();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double raw = g[k].value - t[k] * h1.value - (1.0 - t[k]) * h0.value;
    const double budget = g[k].error_bound + t[k] * h1.error_bound + (1.0 - t[k]) * h0.error_bound;
    epi.add(raw, budget, {{"t", t[k]}});
  }
  CheckReport out = concavity.report();
  out.companions.push_back(epi.report());
  return out;
}

CheckReport check_simplex_concavity(const std::vector<MixtureDensity>& models, double alpha, std::size_t pairs,
                                    std::uint64_t seed, const QuadSpec& spec, double tolerance) {
  if (!(alpha >= 1.0)) throw DomainError("check_simplex_concavity: alpha must be at least 1");
  if (models.size() < 2) throw DomainError("check_simplex_concavity: need at least two models");
  const bool exploratory = models.front().dimension() > 1;
  const std::size_t n = models.size();
  constexpr std::array<double, 3> kLambdas = {0.25, 0.5, 0.75};
  struct Cell {
    std::vector<double> p, q;
    InfoEstimate hp, hq;
    std::array<InfoEstimate, 3> mid;
  };
  std::vector<Cell> cells(pairs);
  parallel::for_each(pairs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    Cell& c = cells[i];
    c.p = random_simplex(rng, n);
    c.q = random_simplex(rng, n);
    c.hp = sum_entropy(models, c.p, alpha, spec);
    c.hq = sum_entropy(models, c.q, alpha, spec);
    for (std::size_t j = 0; j < kLambdas.size(); ++j) {
      std::vector<double> m(n);
      for (std::size_t k = 0; k < n; ++k) m[k] = kLambdas[j] * c.p[k] + (1.0 - kLambdas[j]) * c.q[k];
      c.mid[j] = sum_entropy(models, m, alpha, spec);
    }
  });
  MarginTracker track(exploratory ? "simplex_concavity_matrix" : "simplex_concavity", tolerance);
  for (const auto& c : cells) {
    for (std::size_t j = 0; j < kLambdas.size(); ++j) {
      const double l = kLambdas[j];
      const double raw = c.mid[j].value - l * c.hp.value - (1.0 - l) * c.hq.value;
      const double budget = c.mid[j].error_bound + l * c.hp.error_bound + (1.0 - l) * c.hq.error_bound;
      track.add(raw, budget, {{"p", vec_json(c.p)}, {"q", vec_json(c.q)}, {"lambda", l}, {"alpha", alpha}});
    }
  }
  CheckReport out = track.report();
  out.exploratory = exploratory;
  return out;
}

CheckReport check_schur_concavity(const std::vector<MixtureDensity>& models, std::size_t pairs, std::uint64_t seed,
                                  const QuadSpec& spec, double alpha, double tolerance) {
  if (models.size() < 2) throw DomainError("check_schur_concavity: need at least two models");
  const std::size_t n = models.size();
  struct Cell {
    std::vector<double> a, b;
    InfoEstimate ha, hb;
  };
  std::vector<Cell> cells(pairs);
  parallel::for_each(pairs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    Cell& c = cells[i];
    c.b = random_simplex(rng, n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = n - 1; k > 0; --k) std::swap(perm[k], perm[rng.below(k + 1)]);
    const double lambda = rng.uniform();
    c.a.resize(n);
    for (std::size_t k = 0; k < n; ++k) c.a[k] = lambda * c.b[k] + (1.0 - lambda) * c.b[perm[k]];
    c.ha = sum_entropy(models, c.a, alpha, spec);
    c.hb = sum_entropy(models, c.b, alpha, spec);
  });
  const InfoEstimate equal = sum_entropy(models, std::vector<double>(n, 1.0 / static_cast<double>(n)), alpha, spec);

  MarginTracker track("schur_concavity", tolerance);
  MarginTracker top("equal_weights_max", tolerance);
  for (const auto& c : cells) {
    if (!majorizes(c.b, c.a)) continue;
    track.add(c.ha.value - c.hb.value, c.ha.error_bound + c.hb.error_bound,
              {{"a_squared", vec_json(c.a)}, {"b_squared", vec_json(c.b)}});
    for (const auto* x : {&c.ha, &c.hb}) {
      top.add(equal.value - x->value, equal.error_bound + x->error_bound);
    }
  }
  CheckReport out = track.report();
  out.companions.push_back(top.report());
  return out;
}

CheckReport check_fisher_jensen(const MixtureDensity& model1, const MixtureDensity& model2, std::size_t theta_grid,
                                const QuadSpec& spec, double tolerance) {
  if (model1.dimension() != model2.dimension()) throw DimensionError("check_fisher_jensen: dimension mismatch");
  const auto theta = uniform_grid(theta_grid);
  const auto f1 = fisher_matrix(model1, spec);
  const auto f2 = fisher_matrix(model2, spec);
  std::vector<FisherMatrixEstimate> fb(theta.size());
  parallel::for_each(theta.size(), [&](std::size_t k) { fb[k] = fisher_matrix(blend(model1, model2, theta[k]), spec); });
  MarginTracker track("fisher_jensen", tolerance);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double th = theta[k];
    const SymMatrix rhs = th * f1.matrix + (1.0 - th) * f2.matrix;
    const double raw = min_eigenvalue(rhs - fb[k].matrix);
    const double budget = th * f1.error_bound + (1.0 - th) * f2.error_bound + fb[k].error_bound;
    track.add(raw, budget, {{"theta", th}});
  }
  return track.report();
}

CheckReport check_blachman_stam(const MixtureDensity& model1, const MixtureDensity& model2, std::size_t t_grid,
                                const QuadSpec& spec, double tolerance) {
  require_scalar(model1, "check_blachman_stam");
  require_scalar(model2, "check_blachman_stam");
  const auto t = uniform_grid(t_grid);
  const std::vector<MixtureDensity> models{model1, model2};
  const auto i1 = fisher_information(model1, spec);
  const auto i2 = fisher_information(model2, spec);
  std::vector<InfoEstimate> it(t.size());
  parallel::for_each(t.size(), [&](std::size_t k) {
    it[k] = fisher_information(weighted_sum_law(models, two_point(t[k])), spec);
  });
  MarginTracker track("blachman_stam", tolerance);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double raw = 1.0 / it[k].value - t[k] / i1.value - (1.0 - t[k]) / i2.value;
    const double budget = it[k].error_bound / (it[k].value * it[k].value) +
                          t[k] * i1.error_bound / (i1.value * i1.value) +
                          (1.0 - t[k]) * i2.error_bound / (i2.value * i2.value);
    track.add(raw, budget, {{"t", t[k]}});
  }
  return track.report();
}

CheckReport check_fisher_sandwich(const std::vector<MixtureDensity>& models, const QuadSpec& spec,
                                  double tolerance) {
  std::vector<FisherMatrixEstimate> f(models.size());
  parallel::for_each(models.size(), [&](std::size_t i) { f[i] = fisher_matrix(models[i], spec); });
  MarginTracker lower("cramer_rao", tolerance);
  MarginTracker upper("mixture_upper_bound", tolerance);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const nlohmann::json w = {{"model", mixture_to_json(models[i])}};
    lower.add(min_eigenvalue(f[i].matrix - inverse_pd(covariance(models[i]))), f[i].error_bound, w);
    upper.add(min_eigenvalue(mean_inverse_covariance(models[i]) - f[i].matrix), f[i].error_bound, w);
  }
  return group_reports("fisher_sandwich", {lower.report(), upper.report()}, tolerance);
}

std::pair<double, double> R_convexity_gap(const Vector& x, const Vector& y, double lambda, double mu, double theta) {
  const Vector z = theta * x + (1.0 - theta) * y;
  const SymMatrix lhs(z * z.transpose() / (theta * lambda + (1.0 - theta) * mu));
  const SymMatrix rhs(theta * x * x.transpose() / lambda + (1.0 - theta) * y * y.transpose() / mu);
  const double budget = 16.0 * x.size() * std::numeric_limits<double>::epsilon() * (op_norm(lhs) + op_norm(rhs));
  return {min_eigenvalue(rhs - lhs), budget};
}

CheckReport check_R_convexity(std::size_t samples, std::uint64_t seed, int d, double tolerance) {
  if (d < 1) throw DomainError("check_R_convexity: dimension must be positive");
  struct Cell {
    double raw = 0.0;
    double budget = 0.0;
  };
  std::vector<Cell> cells(samples);
  parallel::for_each(samples, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    Vector x(d);
    Vector y(d);
    for (int k = 0; k < d; ++k) x(k) = rng.normal();
    for (int k = 0; k < d; ++k) y(k) = rng.normal();
    const double lambda = std::exp(std::log(10.0) * (2.0 * rng.uniform() - 1.0));
    const double mu = std::exp(std::log(10.0) * (2.0 * rng.uniform() - 1.0));
    const double theta = rng.uniform();
    const auto g = R_convexity_gap(x, y, lambda, mu, theta);
    cells[i].raw = g.first;
    cells[i].budget = g.second;
  });
  MarginTracker track("R_convexity", tolerance);
  for (std::size_t i = 0; i < samples; ++i) track.add(cells[i].raw, cells[i].budget, {{"instance", i}});
  return track.report();
}

CheckReport verify_sqrtXYsqrtX_counterexample(double tolerance) {
  Matrix a(2, 2);
  a << 2, 1, 1, 1;
  Matrix y(2, 2);
  y << 1, 1, 1, 1;
  const SymMatrix A(a);
  const SymMatrix Y(y);
  auto f = [&](const SymMatrix& x) {
    const SymMatrix r = sqrt_psd(x);
    return SymMatrix(r.matrix() * y * r.matrix());
  };
  const SymMatrix A2(a * a);
  const SymMatrix Y2(y * y);
  const SymMatrix mid = 0.5 * (A + Y);

  auto holds = [&](std::string name, double lambda_min) {
    MarginTracker t(std::move(name), tolerance);
    t.add(lambda_min, 0.0);
    return t.report();
  };
  auto fails = [&](std::string name, double lambda_min) {
    MarginTracker t(std::move(name), tolerance);
    t.add(-lambda_min - 2.0 * tolerance, 0.0, {{"min_eigenvalue", lambda_min}});
    return t.report();
  };
  return group_reports("sqrtXYsqrtX_counterexample",
                       {holds("Y_leq_A", min_eigenvalue(A - Y)),
                        fails("A2_minus_Y2_not_psd", min_eigenvalue(A2 - Y2)),
                        fails("monotonicity_fails", min_eigenvalue(f(A) - f(Y))),
                        fails("midpoint_concavity_fails", min_eigenvalue(f(mid) - 0.5 * (f(Y) + f(A))))},
                       tolerance);
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.exponential();
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= total;
  return v;
}

namespace {

double log_uniform_scale(Rng& rng) { return 0.25 * std::exp(std::log(16.0) * rng.uniform()); }

}  // namespace

MixtureDensity random_scalar_model(Rng& rng) {
  const std::size_t atoms = 1 + rng.below(4);
  std::vector<double> scales(atoms);
  for (auto& s : scales) s = log_uniform_scale(rng);
  return MixtureDensity(ScalarMixerAtomic(std::move(scales), random_simplex(rng, atoms)));
}

MixtureDensity random_matrix_model(Rng& rng, int d) {
  const std::size_t atoms = 1 + rng.below(4);
  std::vector<SymMatrix> ys;
  for (std::size_t k = 0; k < atoms; ++k) {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Vector s(d);
    for (int i = 0; i < d; ++i) s(i) = log_uniform_scale(rng);
    ys.emplace_back(Matrix(q * s.asDiagonal() * q.transpose()));
  }
  return MixtureDensity(MatrixMixerAtomic(std::move(ys), random_simplex(rng, atoms)));
}

}  // namespace mixlab
