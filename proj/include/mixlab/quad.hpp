#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace mixlab {

/// Tolerances and truncation policy for the deterministic quadrature engine.
struct QuadSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// Integration radius in units of the caller's scale hint (largest mixture σ).
  double tail_radius_multiplier = 40.0;
  std::size_t max_subdivisions = std::size_t{1} << 15;

  /// Throws DomainError on non-positive tolerances or a multiplier below 10.
  void validate() const;
};

struct QuadResult {
  double value = 0.0;
  double error_bound = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

/// ∫ f over [-R, R], R = multiplier · scale_hint, by adaptive Gauss-Kronrod 15.
/// Breakpoints form a geometric ladder from fine_scale out to R on both sides.
QuadResult integrate_1d(const std::function<double(double)>& f, const QuadSpec& spec, double scale_hint);
QuadResult integrate_1d(const std::function<double(double)>& f, const QuadSpec& spec, double scale_hint,
                        double fine_scale);

/// ∫∫ f over [-R, R]², outer adaptive rule over x₁ of inner adaptive integrals over x₂.
QuadResult integrate_2d(const std::function<double(double, double)>& f, const QuadSpec& spec,
                        double scale_hint);
QuadResult integrate_2d(const std::function<double(double, double)>& f, const QuadSpec& spec,
                        double scale_hint, double fine_scale);

namespace quad_detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss 7-point weights at Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
using Values = std::array<double, N>;

template <std::size_t N>
struct Panel {
  double a;
  double b;
  Values<N> kronrod;
  double error;
};

/// One GK15 panel. The error is |K15 − G7| maxed over the first `controlled`
/// components plus a rounding floor; it is deliberately not the QUADPACK
/// rescaled heuristic so it stays an upper bound on smooth integrands.
template <std::size_t N, class F>
Panel<N> gk15_panel(F& f, double a, double b, std::size_t controlled) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Values<N> kron{};
  Values<N> gauss{};
  Values<N> absolute{};
  for (std::size_t j = 0; j < 8; ++j) {
    const double dx = half * kKronrodNodes[j];
    const bool gauss_node = (j % 2) == 1;
    const double wk = kKronrodWeights[j];
    const double wg = gauss_node ? kGaussWeights[j / 2] : 0.0;
    auto accumulate = [&](const Values<N>& v) {
      for (std::size_t c = 0; c < N; ++c) {
        kron[c] += wk * v[c];
        gauss[c] += wg * v[c];
        absolute[c] += wk * std::abs(v[c]);
      }
    };
    if (j == 7) {
      accumulate(f(center));
    } else {
      accumulate(f(center - dx));
      accumulate(f(center + dx));
    }
  }
  Panel<N> panel{a, b, {}, 0.0};
  double err = 0.0;
  for (std::size_t c = 0; c < N; ++c) {
    panel.kronrod[c] = kron[c] * half;
    if (c < controlled) {
      const double diff = std::abs((kron[c] - gauss[c]) * half);
      const double rounding = 50.0 * std::numeric_limits<double>::epsilon() * absolute[c] * std::abs(half);
      err = std::max(err, diff + rounding);
    }
  }
  panel.error = err;
  return panel;
}

template <std::size_t N>
struct MultiResult {
  Values<N> value{};
  double error_bound = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

/// Globally adaptive GK15 over the partition given by `breaks` (sorted,
/// at least two entries). Only the first `controlled` components steer
/// refinement and enter the error bound.
template <std::size_t N, class F>
MultiResult<N> adaptive(F&& f, std::span<const double> breaks, const QuadSpec& spec,
                        std::size_t controlled = N) {
  auto cmp = [](const Panel<N>& x, const Panel<N>& y) {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;
  };
  std::priority_queue<Panel<N>, std::vector<Panel<N>>, decltype(cmp)> heap(cmp);
  MultiResult<N> out;
  Values<N> total{};
  double total_err = 0.0;
  auto push = [&](Panel<N> p) {
    for (std::size_t c = 0; c < N; ++c) total[c] += p.kronrod[c];
    total_err += p.error;
    out.evaluations += 15;
    heap.push(std::move(p));
  };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) push(gk15_panel<N>(f, breaks[i], breaks[i + 1], controlled));
  }
  auto target = [&] {
    double mag = 0.0;
    for (std::size_t c = 0; c < controlled; ++c) mag = std::max(mag, std::abs(total[c]));
    return std::max(spec.abs_tol, spec.rel_tol * mag);
  };
  std::size_t panels = heap.size();
  while (!heap.empty() && total_err > target()) {
    if (panels >= spec.max_subdivisions) {
      out.converged = false;
      break;
    }
    Panel<N> worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      out.converged = false;
      break;
    }
    heap.pop();
    for (std::size_t c = 0; c < N; ++c) total[c] -= worst.kronrod[c];
    total_err -= worst.error;
    push(gk15_panel<N>(f, worst.a, mid, controlled));
    push(gk15_panel<N>(f, mid, worst.b, controlled));
    ++panels;
  }
  // Final sums in positional order so the result is independent of heap history.
  std::vector<Panel<N>> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel<N>& x, const Panel<N>& y) { return x.a < y.a; });
  out.value = {};
  out.error_bound = 0.0;
  for (const auto& p : all) {
    for (std::size_t c = 0; c < N; ++c) out.value[c] += p.kronrod[c];
    out.error_bound += p.error;
  }
  return out;
}

/// Symmetric geometric ladder -R, ..., -fine, 0, fine, ..., R.
std::vector<double> symmetric_ladder(double radius, double fine_scale);
/// Geometric ladder 0, fine, 2·fine, ..., R on the half-line.
std::vector<double> half_ladder(double radius, double fine_scale);

/// Tensor-product 2-D rule: outer adaptive over x₁, inner adaptive over x₂.
/// f(x₁, x₂) returns Values<N>; all N components are controlled.
template <std::size_t N, class F>
MultiResult<N> adaptive_2d(F&& f, std::span<const double> outer_breaks, std::span<const double> inner_breaks,
                           const QuadSpec& spec) {
  const double width = outer_breaks.back() - outer_breaks.front();
  QuadSpec inner_spec = spec;
  inner_spec.abs_tol = spec.abs_tol / std::max(width, 1.0);
  std::size_t inner_evaluations = 0;
  bool inner_converged = true;
  // Component N carries the inner error so its integral is the propagated bound.
  auto outer = [&](double x1) {
    auto res = adaptive<N>([&](double x2) { return f(x1, x2); }, inner_breaks, inner_spec);
    inner_evaluations += res.evaluations;
    inner_converged = inner_converged && res.converged;
    Values<N + 1> v{};
    for (std::size_t c = 0; c < N; ++c) v[c] = res.value[c];
    v[N] = res.error_bound;
    return v;
  };
  auto res = adaptive<N + 1>(outer, outer_breaks, spec, N);
  MultiResult<N> out;
  for (std::size_t c = 0; c < N; ++c) out.value[c] = res.value[c];
  out.error_bound = res.error_bound + std::abs(res.value[N]);
  out.converged = res.converged && inner_converged;
  out.evaluations = inner_evaluations;
  return out;
}

}  // namespace quad_detail
}  // namespace mixlab
