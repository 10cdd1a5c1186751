#include "mixlab/quad.hpp"

#include <cmath>
#include <string>

#include "mixlab/error.hpp"

namespace mixlab {

void QuadSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("QuadSpec: tolerances must be positive");
  if (!(tail_radius_multiplier >= 10.0)) {
    throw DomainError("QuadSpec: tail_radius_multiplier must be >= 10, got " +
                      std::to_string(tail_radius_multiplier));
  }
  if (max_subdivisions < 1) throw DomainError("QuadSpec: max_subdivisions must be positive");
}

namespace quad_detail {

std::vector<double> half_ladder(double radius, double fine_scale) {
  std::vector<double> out{0.0};
  double x = std::min(fine_scale, radius);
  if (!(x > 0.0)) x = radius;
  while (x < radius) {
    out.push_back(x);
    x *= 2.0;
  }
  out.push_back(radius);
  return out;
}

std::vector<double> symmetric_ladder(double radius, double fine_scale) {
  const auto half = half_ladder(radius, fine_scale);
  std::vector<double> out;
  out.reserve(2 * half.size() - 1);
  for (auto it = half.rbegin(); it != half.rend(); ++it) out.push_back(-*it);
  out.insert(out.end(), half.begin() + 1, half.end());
  return out;
}

}  // namespace quad_detail

namespace {

double radius_for(const QuadSpec& spec, double scale_hint) {
  spec.validate();
  if (!(scale_hint > 0.0) || !std::isfinite(scale_hint)) throw DomainError("quadrature: scale_hint must be positive");
  return spec.tail_radius_multiplier * scale_hint;
}

}  // namespace

QuadResult integrate_1d(const std::function<double(double)>& f, const QuadSpec& spec, double scale_hint) {
  return integrate_1d(f, spec, scale_hint, scale_hint / 1024.0);
}

QuadResult integrate_1d(const std::function<double(double)>& f, const QuadSpec& spec, double scale_hint,
                        double fine_scale) {
  const double radius = radius_for(spec, scale_hint);
  const auto breaks = quad_detail::symmetric_ladder(radius, fine_scale);
  auto res = quad_detail::adaptive<1>([&](double x) { return quad_detail::Values<1>{f(x)}; }, breaks, spec);
  return {res.value[0], res.error_bound, res.converged, res.evaluations};
}

QuadResult integrate_2d(const std::function<double(double, double)>& f, const QuadSpec& spec,
                        double scale_hint) {
  return integrate_2d(f, spec, scale_hint, scale_hint / 64.0);
}

QuadResult integrate_2d(const std::function<double(double, double)>& f, const QuadSpec& spec, double scale_hint,
                        double fine_scale) {
  const double radius = radius_for(spec, scale_hint);
  const auto breaks = quad_detail::symmetric_ladder(radius, fine_scale);
  auto res = quad_detail::adaptive_2d<1>(
      [&](double x1, double x2) { return quad_detail::Values<1>{f(x1, x2)}; }, breaks, breaks, spec);
  return {res.value[0], res.error_bound, res.converged, res.evaluations};
}

}  // namespace mixlab
