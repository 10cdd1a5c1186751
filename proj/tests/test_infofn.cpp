#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mixlab/checks.hpp"
#include "mixlab/error.hpp"
#include "mixlab/infofn.hpp"

using namespace mixlab;

namespace {

MixtureDensity scalar(std::vector<double> s, std::vector<double> w) {
  return MixtureDensity(ScalarMixerAtomic(std::move(s), std::move(w)));
}

MixtureDensity scaled(const MixtureDensity& m, double c) {
  const auto& mixer = m.mixer();
  if (const auto* s = std::get_if<ScalarMixerAtomic>(&mixer)) {
    std::vector<double> sc = s->scales();
    for (double& x : sc) x *= c;
    return scalar(sc, s->weights());
  }
  const auto& mm = std::get<MatrixMixerAtomic>(mixer);
  std::vector<SymMatrix> atoms;
  for (const auto& a : mm.atoms()) atoms.push_back(a * c);
  return MixtureDensity(MatrixMixerAtomic(atoms, mm.weights()));
}

MixtureDensity cauchy(std::size_t m) {
  return MixtureDensity(atomize(StableMixerSpec{StableKind::PositiveStablePower, 1.0, 0}, m, 0));
}

QuadSpec heavy() {
  QuadSpec q;
  q.tail_radius_multiplier = 1e6;
  return q;
}

bool overlap(const InfoEstimate& a, const InfoEstimate& b) {
  return std::abs(a.value - b.value) <= a.error_bound + b.error_bound;
}

}  // namespace

TEST_SUITE("infofn") {
  TEST_CASE("gaussian closed forms") {
    for (double s : {0.5, 1.0, 3.0}) {
      const auto g = scalar({s}, {1});
      const auto h = entropy(g);
      CHECK(h.method == Method::Quadrature);
      CHECK(std::abs(h.value - 0.5 * std::log(2 * std::numbers::pi * std::numbers::e * s * s)) < 1e-9);
      const auto r = renyi_entropy(g, 2.0);
      CHECK(std::abs(r.value - (0.5 * std::log(2 * std::numbers::pi * s * s) + 0.5 * std::log(2.0))) < 1e-9);
      CHECK(std::abs(fisher_information(g).value - 1.0 / (s * s)) < 1e-9);
    }
    CHECK(entropy(scalar({1}, {1})).value == doctest::Approx(1.4189385).epsilon(1e-7));
    CHECK(renyi_entropy(scalar({1}, {1}), 2.0).value == doctest::Approx(1.2655121).epsilon(1e-7));
  }

  TEST_CASE("gaussian fisher matrix in two dimensions") {
    const SymMatrix cov(Matrix((Matrix(2, 2) << 2.0, 0.6, 0.6, 1.0).finished()));
    const MixtureDensity g(MatrixMixerAtomic::from_covariances({cov}, {1.0}));
    const auto f = fisher_matrix(g);
    CHECK((f.matrix.matrix() - cov.matrix().inverse()).norm() < 1e-9);
    const double h = 0.5 * std::log(std::pow(2 * std::numbers::pi * std::numbers::e, 2) * cov.matrix().determinant());
    CHECK(std::abs(entropy(g).value - h) < 1e-8);
  }

  TEST_CASE("two atom example sits strictly inside the sandwich") {
    const auto m = scalar({1, 2}, {0.5, 0.5});
    const auto f = fisher_information(m);
    CHECK(f.value - f.error_bound > 0.4);
    CHECK(f.value + f.error_bound < 0.625);
    CHECK(covariance(m)(0, 0) == doctest::Approx(2.5));
    CHECK(mean_inverse_covariance(m)(0, 0) == doctest::Approx(0.625));
  }

  TEST_CASE("covariance examples") {
    const MixtureDensity m(MatrixMixerAtomic::from_covariances(
        {SymMatrix::diagonal(Eigen::Vector2d(1, 2)), SymMatrix::diagonal(Eigen::Vector2d(2, 1))}, {0.5, 0.5}));
    CHECK((covariance(m).matrix() - 1.5 * Matrix::Identity(2, 2)).norm() < 1e-14);
    const MixtureDensity y(MatrixMixerAtomic({SymMatrix::diagonal(Eigen::Vector2d(1, 2)), SymMatrix::diagonal(Eigen::Vector2d(2, 1))},
                                             {0.5, 0.5}));
    CHECK((covariance(y).matrix() - 2.5 * Matrix::Identity(2, 2)).norm() < 1e-14);
  }

  TEST_CASE("cauchy") {
    const auto c = cauchy(16384);
    CHECK(std::abs(entropy(c, heavy()).value - std::log(4 * std::numbers::pi)) < 5e-3);
    CHECK(std::abs(fisher_information(c, heavy()).value - 0.5) < 2e-2);
    const auto closed = integrate_1d(
        [](double x) {
          const double d = 1.0 + x * x;
          return 4.0 * x * x / (std::numbers::pi * d * d * d);
        },
        heavy(), 1.0);
    CHECK(std::abs(closed.value - 0.5) < 1e-6);
  }

  TEST_CASE("monte carlo agrees with quadrature on the two atom model") {
    const auto m = scalar({1, 2}, {0.5, 0.5});
    const McSpec mc{2'000'000, 5};
    const auto hq = entropy(m), hm = entropy_monte_carlo(m, mc);
    CHECK(hm.method == Method::MonteCarlo);
    CHECK(hm.samples_used == mc.samples);
    CHECK(overlap(hq, hm));
    const auto fq = fisher_matrix(m), fm = fisher_matrix_monte_carlo(m, mc);
    CHECK(std::abs(fq.matrix(0, 0) - fm.matrix(0, 0)) <= fq.error_bound + fm.error_bound);
    const auto rq = renyi_entropy(m, 2.0), rm = renyi_entropy_monte_carlo(m, 2.0, mc);
    CHECK(overlap(rq, rm));
  }

  TEST_CASE("quadrature and monte carlo agree in two dimensions") {
    Rng rng(31);
    const McSpec mc{1'000'000, 9};
    for (int t = 0; t < 5; ++t) {
      const auto m = random_matrix_model(rng, 2);
      CHECK(overlap(entropy(m), entropy_monte_carlo(m, mc)));
      const auto fq = fisher_matrix(m), fm = fisher_matrix_monte_carlo(m, mc);
      CHECK(op_norm((fq.matrix - fm.matrix).matrix()) <= fq.error_bound + fm.error_bound);
    }
  }

  TEST_CASE("three dimensions route to monte carlo") {
    const MixtureDensity g(MatrixMixerAtomic({SymMatrix::diagonal(Eigen::Vector3d(1, 2, 0.5))}, {1.0}));
    const McSpec mc{1'000'000, 3};
    const auto h = entropy(g, {}, mc);
    CHECK(h.method == Method::MonteCarlo);
    const double exact = 1.5 * std::log(2 * std::numbers::pi * std::numbers::e) + std::log(1.0);
    CHECK(std::abs(h.value - exact) <= h.error_bound);
    const auto f = fisher_matrix(g, {}, mc);
    CHECK(f.method == Method::MonteCarlo);
    const Matrix expected = Eigen::Vector3d(1, 0.25, 4).asDiagonal();
    CHECK(op_norm(f.matrix.matrix() - expected) <= f.error_bound);
  }

  TEST_CASE("renyi continuity and monotonicity") {
    Rng rng(2);
    for (int t = 0; t < 5; ++t) {
      const auto m = random_scalar_model(rng);
      CHECK(std::abs(renyi_entropy(m, 1.0 + 1e-6).value - entropy(m).value) < 1e-4);
      double prev = entropy(m).value;
      for (double a : {1.5, 2.0, 3.0, 5.0}) {
        const auto r = renyi_entropy(m, a);
        CHECK(r.value <= prev + r.error_bound);
        prev = r.value;
      }
    }
    CHECK_THROWS_AS(renyi_entropy(scalar({1}, {1}), 0.0), DomainError);
    CHECK(renyi_entropy(scalar({1}, {1}), 1.0).value == entropy(scalar({1}, {1})).value);
  }

  TEST_CASE("scaling law") {
    Rng rng(8);
    for (int t = 0; t < 10; ++t) {
      const int d = t < 5 ? 1 : 2;
      const auto m = d == 1 ? random_scalar_model(rng) : random_matrix_model(rng, 2);
      const auto h = entropy(m);
      for (double c : {0.5, 2.0}) {
        const auto hc = entropy(scaled(m, c));
        CHECK(std::abs(hc.value - h.value - d * std::log(c)) <= hc.error_bound + h.error_bound);
      }
    }
  }

  TEST_CASE("cramer rao and mixture bounds") {
    Rng rng(14);
    for (int t = 0; t < 20; ++t) {
      const auto m = t < 10 ? random_scalar_model(rng) : random_matrix_model(rng, 2);
      const auto f = fisher_matrix(m);
      CHECK(psd_leq(inverse_pd(covariance(m)), f.matrix, f.error_bound + 1e-12).holds);
      CHECK(psd_leq(f.matrix, mean_inverse_covariance(m), f.error_bound + 1e-12).holds);
    }
  }

  TEST_CASE("scalar sandwich with the second moment of the mixer") {
    Rng rng(15);
    for (int t = 0; t < 20; ++t) {
      const auto m = random_scalar_model(rng);
      const auto& mixer = std::get<ScalarMixerAtomic>(m.mixer());
      double ey2 = 0, einv = 0;
      for (std::size_t k = 0; k < mixer.size(); ++k) {
        ey2 += mixer.weights()[k] * mixer.scales()[k] * mixer.scales()[k];
        einv += mixer.weights()[k] / (mixer.scales()[k] * mixer.scales()[k]);
      }
      const auto f = fisher_information(m);
      CHECK(1.0 / ey2 <= f.value + f.error_bound);
      CHECK(f.value - f.error_bound <= einv);
    }
  }

  TEST_CASE("json") {
    const auto j = to_json(entropy(scalar({1}, {1})));
    CHECK(j.at("method") == "quadrature");
    CHECK(j.contains("error_bound"));
  }
}
