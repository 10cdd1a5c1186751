#include <doctest.h>

#include <cmath>

#include "mixlab/error.hpp"
#include "mixlab/matana.hpp"
#include "mixlab/rng.hpp"

using namespace mixlab;

namespace {

Matrix gaussian(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  }
  return m;
}

SymMatrix random_pd(Rng& rng, int d) {
  const Matrix g = gaussian(rng, d, d);
  return SymMatrix(g * g.transpose() + 0.1 * Matrix::Identity(d, d));
}

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_SUITE("matana") {
  TEST_CASE("psd_leq examples") {
    const SymMatrix a = SymMatrix::diagonal(Eigen::Vector2d(1, 1));
    const auto same = psd_leq(a, a);
    CHECK(same.holds);
    CHECK(same.min_eigenvalue_of_difference == doctest::Approx(0.0));

    const auto v = psd_leq(a, SymMatrix::diagonal(Eigen::Vector2d(2, 0.5)));
    CHECK_FALSE(v.holds);
    CHECK(v.min_eigenvalue_of_difference == doctest::Approx(-0.5));

    const SymMatrix A(m2(2, 1, 1, 1));
    const SymMatrix Y(m2(1, 1, 1, 1));
    CHECK(psd_leq(Y, A).holds);
    const SymMatrix A2(A.matrix() * A.matrix());
    const SymMatrix Y2(Y.matrix() * Y.matrix());
    CHECK((A2 - Y2).matrix().determinant() == doctest::Approx(-1.0));
    CHECK_FALSE(psd_leq(Y2, A2).holds);
  }

  TEST_CASE("psd_leq dimension mismatch") {
    CHECK_THROWS_AS(psd_leq(SymMatrix::identity(2), SymMatrix::identity(3)), DimensionError);
  }

  TEST_CASE("verdict invariant") {
    const auto v = psd_leq(SymMatrix::identity(2), SymMatrix::identity(2) * (1.0 - 1e-12), 1e-9);
    CHECK(v.holds == (v.min_eigenvalue_of_difference >= -v.tolerance));
    CHECK(v.holds);
  }

  TEST_CASE("schatten norms") {
    CHECK(schatten_norm(Matrix::Identity(3, 3), 2.0) == doctest::Approx(std::sqrt(3.0)));
    CHECK(schatten_norm(Eigen::Vector2d(3, 4).asDiagonal().toDenseMatrix(), INFINITY) == doctest::Approx(4.0));
    CHECK_THROWS_AS(schatten_norm(Matrix::Identity(2, 2), 0.5), DomainError);
  }

  TEST_CASE("schatten norm equivalence on random matrices") {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
      const int d = 2 + static_cast<int>(rng.below(7));
      const Matrix a = gaussian(rng, d, d);
      const double op = op_norm(a);
      for (double p : {1.0, 1.5, 2.0, 3.0, 7.0}) {
        const double s = schatten_norm(a, p);
        CHECK(op <= s * (1.0 + 1e-14));
        CHECK(s <= std::pow(d, 1.0 / p) * op * (1.0 + 1e-14));
      }
    }
  }

  TEST_CASE("sqrt_psd") {
    const auto r = sqrt_psd(SymMatrix::diagonal(Eigen::Vector2d(4, 9)));
    CHECK((r.matrix() - Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix()).norm() < 1e-14);
    CHECK((sqrt_psd(SymMatrix::identity(3)).matrix() - Matrix::Identity(3, 3)).norm() < 1e-14);
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
      const SymMatrix a = random_pd(rng, 4);
      const SymMatrix s = sqrt_psd(a);
      CHECK((s.matrix() * s.matrix() - a.matrix()).norm() < 1e-10);
      CHECK(min_eigenvalue(s) >= 0.0);
    }
    CHECK_THROWS_AS(sqrt_psd(SymMatrix::diagonal(Eigen::Vector2d(1, -1e-3))), DomainError);
    CHECK_NOTHROW(sqrt_psd(SymMatrix::diagonal(Eigen::Vector2d(1, -1e-13))));
  }

  TEST_CASE("eigendecomposition reconstruction up to condition 1e8") {
    Rng rng(17);
    for (int t = 0; t < 50; ++t) {
      const int d = 2 + static_cast<int>(rng.below(8));
      Eigen::HouseholderQR<Matrix> qr(gaussian(rng, d, d));
      const Matrix q = qr.householderQ();
      Vector lam(d);
      for (int i = 0; i < d; ++i) lam(i) = std::pow(10.0, 8.0 * i / (d - 1)) * (rng.uniform() < 0.5 ? -1 : 1);
      lam /= lam.cwiseAbs().maxCoeff();
      const SymMatrix a(Matrix(q * lam.asDiagonal() * q.transpose()));
      const auto e = eigen_decompose(a);
      const Matrix back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
      CHECK((back - a.matrix()).norm() < 1e-11);
    }
  }

  TEST_CASE("psd order is reflexive and transitive") {
    Rng rng(23);
    for (int t = 0; t < 100; ++t) {
      const SymMatrix a = random_pd(rng, 3);
      const SymMatrix b = a + random_pd(rng, 3);
      const SymMatrix c = b + random_pd(rng, 3);
      CHECK(psd_leq(a, a).holds);
      const auto ab = psd_leq(a, b);
      const auto bc = psd_leq(b, c);
      REQUIRE(ab.holds);
      REQUIRE(bc.holds);
      CHECK(psd_leq(a, c, ab.tolerance + bc.tolerance).holds);
    }
  }

  TEST_CASE("matrix inverse is operator convex") {
    Rng rng(29);
    for (int t = 0; t < 500; ++t) {
      const SymMatrix a = random_pd(rng, 3);
      const SymMatrix b = random_pd(rng, 3);
      for (double th : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const SymMatrix lhs = inverse_pd(th * a + (1.0 - th) * b);
        const SymMatrix rhs = th * inverse_pd(a) + (1.0 - th) * inverse_pd(b);
        CHECK(min_eigenvalue(rhs - lhs) >= -1e-9 * (1.0 + op_norm(rhs)));
      }
    }
  }

  TEST_CASE("symmetrization at construction") {
    const SymMatrix s(m2(1, 2, 0, 1));
    CHECK(s(0, 1) == 1.0);
    CHECK(s(1, 0) == 1.0);
  }

  TEST_CASE("majorization") {
    CHECK(majorizes(std::vector<double>{1, 0}, std::vector<double>{0.5, 0.5}));
    CHECK_FALSE(majorizes(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}));
    CHECK(majorizes(std::vector<double>{0.6, 0.2, 0.2}, std::vector<double>{0.5, 0.3, 0.2}));
    const std::vector<double> flat(3, 1.0 / 3.0);
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> v(3);
      double s = 0;
      for (auto& x : v) s += (x = rng.exponential());
      for (auto& x : v) x /= s;
      CHECK(majorizes(v, flat));
    }
    CHECK_THROWS(majorizes(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}));
    CHECK_THROWS(majorizes(std::vector<double>{0.7, 0.7}, std::vector<double>{0.5, 0.5}));
  }
}
