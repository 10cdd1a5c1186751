#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mixlab/error.hpp"
#include "mixlab/fishmin.hpp"
#include "mixlab/infofn.hpp"

using namespace mixlab;

TEST_SUITE("fishmin") {
  TEST_CASE("lattice size") {
    CHECK(simplex_lattice(2, 40).size() == 41);
    CHECK(simplex_lattice(3, 40).size() == 861);
    for (const auto& p : simplex_lattice(3, 7)) {
      double s = 0;
      for (double v : p) s += v;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    }
  }

  TEST_CASE("gaussian objective is constant") {
    const MixtureDensity g(ScalarMixerAtomic::single(2.0));
    MinimizeSpec spec;
    spec.n = 3;
    spec.grid_steps = 10;
    const auto r = minimize_fisher(g, spec);
    CHECK(r.complete);
    for (const auto& e : r.trace) CHECK(std::abs(e.value - 0.25) < 1e-9);
  }

  TEST_CASE("symmetry and vertex value for two atoms") {
    const MixtureDensity m(ScalarMixerAtomic({1, 2}, {0.5, 0.5}));
    const auto r = minimize_fisher(m, {});
    REQUIRE(r.trace.size() == 41);
    for (std::size_t k = 0; k < 41; ++k) {
      const auto& a = r.trace[k];
      const auto& b = r.trace[40 - k];
      CHECK(std::abs(a.value - b.value) <= a.error_bound + b.error_bound);
    }
    const auto vertex = fisher_matrix(m);
    CHECK(std::abs(r.trace.front().value - vertex.matrix(0, 0)) <= vertex.error_bound + r.trace.front().error_bound);
    CHECK(r.best_value <= r.trace.front().value);
    CHECK((r.location == "vertex" || r.location == "interior" || r.location == "boundary"));
    for (const auto& c : r.checks) CHECK(c.pass);
  }

  TEST_CASE("descent reaches the grid optimum") {
    const MixtureDensity m(ScalarMixerAtomic({1, 2}, {0.5, 0.5}));
    MinimizeSpec spec;
    spec.n = 3;
    const auto grid = minimize_fisher(m, spec);
    spec.method = MinimizeMethod::ProjectedDescent;
    const auto desc = minimize_fisher(m, spec);
    CHECK(desc.best_value <= grid.best_value + grid.best_error + desc.best_error);
  }

  TEST_CASE("budget exhaustion") {
    const MixtureDensity m(ScalarMixerAtomic({1, 2}, {0.5, 0.5}));
    MinimizeSpec spec;
    spec.budget = 5;
    const auto r = minimize_fisher(m, spec);
    CHECK_FALSE(r.complete);
    CHECK(r.trace.size() <= 5);
  }

  TEST_CASE("preconditions") {
    const MixtureDensity m(ScalarMixerAtomic::single(1.0));
    MinimizeSpec spec;
    spec.n = 5;
    CHECK_THROWS_AS(minimize_fisher(m, spec), DomainError);
  }
}
