#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mixlab/error.hpp"
#include "mixlab/mixture.hpp"
#include "mixlab/quad.hpp"

using namespace mixlab;

namespace {

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

TEST_SUITE("quad") {
  TEST_CASE("gaussian density integrates to one") {
    const auto r = integrate_1d(phi, {}, 1.0);
    CHECK(r.converged);
    CHECK(std::abs(r.value - 1.0) < 1e-12);
  }

  TEST_CASE("gaussian even moments up to order six") {
    const double exact[] = {1.0, 1.0, 3.0, 15.0};
    for (int k = 0; k <= 3; ++k) {
      const auto r = integrate_1d([k](double x) { return std::pow(x, 2 * k) * phi(x); }, {}, 1.0);
      const double err = std::abs(r.value - exact[k]);
      CHECK(err < 1e-10 * exact[k]);
      CHECK(err <= r.error_bound);
    }
  }

  TEST_CASE("laplace normalization has an honest bound") {
    const auto r = integrate_1d([](double x) { return 0.5 * std::exp(-std::abs(x)); }, {}, 1.0);
    const double exact = 1.0 - std::exp(-40.0);
    CHECK(std::abs(r.value - exact) < 1e-10);
    CHECK(std::abs(r.value - exact) <= r.error_bound);
  }

  TEST_CASE("cauchy with a wide truncation") {
    QuadSpec spec;
    spec.tail_radius_multiplier = 1e6;
    const auto r = integrate_1d([](double x) { return 1.0 / (std::numbers::pi * (1.0 + x * x)); }, spec, 1.0);
    const double truncated = 2.0 / std::numbers::pi * std::atan(1e6);
    CHECK(std::abs(r.value - 1.0) < 1e-6);
    CHECK(std::abs(r.value - truncated) <= r.error_bound + 1e-15);
  }

  TEST_CASE("halving rel_tol never increases the true error") {
    auto f = [](double x) { return std::pow(x, 6) * phi(x); };
    QuadSpec spec;
    spec.rel_tol = 1e-6;
    double prev = std::abs(integrate_1d(f, spec, 1.0).value - 15.0);
    for (int i = 0; i < 8; ++i) {
      spec.rel_tol /= 2.0;
      const double err = std::abs(integrate_1d(f, spec, 1.0).value - 15.0);
      CHECK(err <= prev + 1e-13);
      prev = err;
    }
  }

  TEST_CASE("bivariate gaussian") {
    const auto r = integrate_2d([](double x, double y) { return phi(x) * phi(y); }, {}, 1.0);
    CHECK(std::abs(r.value - 1.0) < 1e-9);
    const auto odd = integrate_2d([](double x, double y) { return x * y * phi(x) * phi(y); }, {}, 1.0);
    CHECK(std::abs(odd.value) < 1e-10);
  }

  TEST_CASE("density of a diagonal d=2 atom integrates to one") {
    const MixtureDensity mix(MatrixMixerAtomic({SymMatrix::diagonal(Eigen::Vector2d(1.0, 2.0))}, {1.0}));
    const auto r = integrate_2d(
        [&](double x, double y) {
          Vector v(2);
          v << x, y;
          return mix.density(v);
        },
        {}, 2.0);
    CHECK(std::abs(r.value - 1.0) < 1e-8);
  }

  TEST_CASE("spec validation") {
    QuadSpec spec;
    spec.tail_radius_multiplier = 5.0;
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec = {};
    spec.rel_tol = 0.0;
    CHECK_THROWS_AS(spec.validate(), DomainError);
  }

  TEST_CASE("budget exhaustion is reported") {
    QuadSpec spec;
    spec.max_subdivisions = 4;
    spec.rel_tol = 1e-15;
    spec.abs_tol = 1e-300;
    const auto r = integrate_1d([](double x) { return std::sin(50.0 * x) * std::sin(50.0 * x) * phi(x); }, spec, 1.0);
    CHECK_FALSE(r.converged);
    CHECK(r.error_bound > 0.0);
  }
}
