#include "mixlab/fishmin.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "mixlab/config.hpp"
#include "mixlab/error.hpp"
#include "mixlab/infofn.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab {

const char* to_string(MinimizeMethod m) { return m == MinimizeMethod::Grid ? "grid" : "projected-descent"; }

std::vector<std::vector<double>> simplex_lattice(std::size_t n, std::size_t steps) {
  if (n == 0 || steps == 0) throw DomainError("simplex_lattice: n and steps must be positive");
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> k(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == n) {
      k[i] = left;
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = static_cast<double>(k[j]) / static_cast<double>(steps);
      out.push_back(std::move(p));
      return;
    }
    for (std::size_t c = left + 1; c-- > 0;) {
      k[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, steps);
  return out;
}

namespace {

SimplexPoint to_point(std::vector<double> squares) {
  for (auto& s : squares) s = std::max(s, 0.0);
  const double total = std::accumulate(squares.begin(), squares.end(), 0.0);
  for (auto& s : squares) s /= total;
  return SimplexPoint::from_squares(std::move(squares));
}

/// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(const std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) shift = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::max(v[j] - shift, 0.0);
  return out;
}

std::string classify(const std::vector<double>& p) {
  const double top = *std::max_element(p.begin(), p.end());
  if (top >= 1.0 - 1e-12) return "vertex";
  if (std::any_of(p.begin(), p.end(), [](double x) { return x <= 1e-12; })) return "boundary";
  return "interior";
}

}  // namespace

MinimizeResult minimize_fisher(const MixtureDensity& model, const MinimizeSpec& spec) {
  if (model.dimension() != 1) throw DomainError("minimize_fisher: scalar model required");
  if (spec.n < 1 || spec.n > 4) throw DomainError("minimize_fisher: n must lie in [1, 4]");
  const std::vector<MixtureDensity> models(spec.n, model);
  auto objective = [&](const std::vector<double>& squares) {
    return fisher_information(weighted_sum_law(models, to_point(squares)), spec.quad);
  };

  MinimizeResult out;
  out.method = spec.method;
  if (spec.method == MinimizeMethod::Grid) {
    auto grid = simplex_lattice(spec.n, spec.grid_steps);
    if (grid.size() > spec.budget) {
      grid.resize(spec.budget);
      out.complete = false;
    }
    out.trace.resize(grid.size());
    parallel::for_each(grid.size(), [&](std::size_t i) {
      const auto est = objective(grid[i]);
      out.trace[i] = {grid[i], est.value, est.error_bound};
    });
  } else {
    // Objective extended to the cone with degree −1 homogeneity, so partial
    // derivatives may leave the simplex: F(p) = I(S_{p/|p|}) / |p|.
    Rng rng(spec.seed);
    std::vector<double> p = random_simplex(rng, spec.n);
    auto eval = [&](const std::vector<double>& q) {
      const auto est = objective(q);
      out.trace.push_back({to_point(q).squares(), est.value, est.error_bound});
      return est.value;
    };
    auto budget_left = [&] { return out.trace.size() < spec.budget; };
    double value = eval(p);
    double eta = 0.1;
    constexpr double kFd = 1e-5;
    constexpr double kMinStep = 1e-4;
    while (budget_left()) {
      std::vector<double> grad(spec.n);
      for (std::size_t i = 0; i < spec.n && budget_left(); ++i) {
        auto up = p;
        auto down = p;
        up[i] += kFd;
        const double lo = std::min(kFd, p[i]);
        down[i] -= lo;
        auto scaled = [&](const std::vector<double>& q) {
          const double total = std::accumulate(q.begin(), q.end(), 0.0);
          return eval(q) / total;
        };
        grad[i] = (scaled(up) - (lo > 0.0 ? scaled(down) : value)) / (kFd + lo);
      }
      if (!budget_left()) {
        out.complete = false;
        break;
      }
      bool moved = false;
      while (budget_left()) {
        std::vector<double> trial(spec.n);
        for (std::size_t i = 0; i < spec.n; ++i) trial[i] = p[i] - eta * grad[i];
        trial = project_simplex(trial);
        double step = 0.0;
        for (std::size_t i = 0; i < spec.n; ++i) step = std::max(step, std::abs(trial[i] - p[i]));
        if (step < kMinStep) break;
        const double v = eval(trial);
        if (v < value) {
          p = trial;
          value = v;
          moved = true;
          eta *= 1.5;
          break;
        }
        eta *= 0.5;
      }
      if (!moved) {
        out.complete = budget_left();
        break;
      }
    }
  }

  auto best = std::min_element(out.trace.begin(), out.trace.end(),
                               [](const TraceEntry& a, const TraceEntry& b) { return a.value < b.value; });
  out.best_squares = best->squares;
  out.best_value = best->value;
  out.best_error = best->error_bound;
  out.location = classify(out.best_squares);

  // Permutation symmetry: entries sharing the sorted squares must agree.
  MarginTracker symmetry("permutation_symmetry", spec.tolerance);
  std::map<std::vector<long long>, const TraceEntry*> first;
  for (const auto& e : out.trace) {
    std::vector<long long> key;
    for (double s : e.squares) key.push_back(std::llround(s * 1e9));
    std::sort(key.begin(), key.end());
    auto [it, inserted] = first.emplace(key, &e);
    if (!inserted) {
      symmetry.add(-std::abs(e.value - it->second->value), e.error_bound + it->second->error_bound,
                   {{"squares", e.squares}, {"other", it->second->squares}});
    }
  }
  // 1/Var(X) ≤ I(S) ≤ I(X) for every evaluated S.
  const auto single = fisher_information(model, spec.quad);
  const double cramer_rao = 1.0 / covariance(model)(0, 0);
  MarginTracker lower("cramer_rao_lower", spec.tolerance);
  MarginTracker upper("blachman_stam_upper", spec.tolerance);
  for (const auto& e : out.trace) {
    lower.add(e.value - cramer_rao, e.error_bound, {{"squares", e.squares}});
    upper.add(single.value - e.value, e.error_bound + single.error_bound, {{"squares", e.squares}});
  }
  // Entropy of the sum is largest at equal weights.
  std::vector<InfoEstimate> h(out.trace.size());
  parallel::for_each(out.trace.size(), [&](std::size_t i) {
    h[i] = entropy(weighted_sum_law(models, to_point(out.trace[i].squares)), spec.quad);
  });
  const auto h_equal = entropy(weighted_sum_law(models, SimplexPoint::equal(spec.n)), spec.quad);
  MarginTracker entropy_max("entropy_max_at_equal_weights", spec.tolerance);
  for (std::size_t i = 0; i < h.size(); ++i) {
    entropy_max.add(h_equal.value - h[i].value, h_equal.error_bound + h[i].error_bound,
                    {{"squares", out.trace[i].squares}});
  }
  out.checks = {symmetry.report(), lower.report(), upper.report(), entropy_max.report()};
  return out;
}

nlohmann::json to_json(const MinimizeResult& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"best_squares", r.best_squares},
          {"best_value", r.best_value},
          {"best_error_bound", r.best_error},
          {"method", to_string(r.method)},
          {"complete", r.complete},
          {"location", r.location},
          {"evaluations", r.trace.size()},
          {"checks", checks}};
}

std::string trace_to_csv(const MinimizeResult& r) {
  std::ostringstream os;
  const std::size_t n = r.trace.empty() ? 0 : r.trace.front().squares.size();
  for (std::size_t i = 0; i < n; ++i) os << 'p' << (i + 1) << ',';
  os << "value,error_bound\n";
  for (const auto& e : r.trace) {
    for (double s : e.squares) os << format_double(s) << ',';
    os << format_double(e.value) << ',' << format_double(e.error_bound) << '\n';
  }
  return os.str();
}

}  // namespace mixlab
