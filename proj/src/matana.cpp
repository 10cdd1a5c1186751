#include "mixlab/matana.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mixlab/error.hpp"

namespace mixlab {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("SymMatrix: matrix is not square");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index d) { return SymMatrix(Matrix::Identity(d, d)); }

SymMatrix SymMatrix::zero(Eigen::Index d) { return SymMatrix(Matrix::Zero(d, d)); }

SymMatrix SymMatrix::diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (dim() != o.dim()) throw DimensionError("SymMatrix: dimension mismatch in +");
  return SymMatrix(Matrix(m_ + o.m_));
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  if (dim() != o.dim()) throw DimensionError("SymMatrix: dimension mismatch in -");
  return SymMatrix(Matrix(m_ - o.m_));
}

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(Matrix(m_ * s)); }

EigenDecomposition eigen_decompose(const SymMatrix& a) {
  if (a.dim() == 1) return {Vector::Constant(1, a(0, 0)), Matrix::Identity(1, 1)};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const SymMatrix& a) {
  if (a.dim() == 1) return a(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double op_norm(const SymMatrix& a) {
  if (a.dim() == 1) return std::abs(a(0, 0));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double op_norm(const Matrix& a) { return singular_values(a).maxCoeff(); }

SymMatrix apply_spectral(const SymMatrix& a, const std::function<double(double)>& f) {
  const EigenDecomposition eig = eigen_decompose(a);
  Vector mapped = eig.values.unaryExpr(f);
  return SymMatrix(Matrix(eig.vectors * mapped.asDiagonal() * eig.vectors.transpose()));
}

double default_psd_tolerance(const SymMatrix& a, const SymMatrix& b) {
  return 1e-9 * (1.0 + op_norm(a) + op_norm(b));
}

PsdVerdict psd_leq(const SymMatrix& a, const SymMatrix& b) {
  return psd_leq(a, b, default_psd_tolerance(a, b));
}

PsdVerdict psd_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
  if (a.dim() != b.dim()) throw DimensionError("psd_leq: dimension mismatch");
  const double lmin = min_eigenvalue(b - a);
  return {lmin, tol, lmin >= -tol};
}

Vector singular_values(const Matrix& a) {
  if (a.rows() == 1 && a.cols() == 1) return Vector::Constant(1, std::abs(a(0, 0)));
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

double schatten_norm_from_singular_values(const Vector& sv, double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError("schatten_norm: p must be >= 1, got " + std::to_string(p));
  const double top = sv.size() ? sv.maxCoeff() : 0.0;
  if (std::isinf(p) || top == 0.0) return top;
  // Factor out the largest value so σᵢᵖ cannot overflow.
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) sum += std::pow(sv(i) / top, p);
  return top * std::pow(sum, 1.0 / p);
}

double schatten_norm(const Matrix& a, double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError("schatten_norm: p must be >= 1, got " + std::to_string(p));
  return schatten_norm_from_singular_values(singular_values(a), p);
}

SymMatrix sqrt_psd(const SymMatrix& a) {
  const EigenDecomposition eig = eigen_decompose(a);
  const double scale = 1.0 + eig.values.cwiseAbs().maxCoeff();
  if (eig.values(0) < -1e-12 * scale) {
    throw DomainError("sqrt_psd: matrix has negative eigenvalue " + std::to_string(eig.values(0)));
  }
  Vector roots = eig.values.unaryExpr([](double x) { return std::sqrt(std::max(x, 0.0)); });
  return SymMatrix(Matrix(eig.vectors * roots.asDiagonal() * eig.vectors.transpose()));
}

SymMatrix inverse_pd(const SymMatrix& a) {
  const EigenDecomposition eig = eigen_decompose(a);
  if (!(eig.values(0) > 0.0)) {
    throw DomainError("inverse_pd: matrix is not positive definite (min eigenvalue " +
                      std::to_string(eig.values(0)) + ")");
  }
  Vector inv = eig.values.cwiseInverse();
  return SymMatrix(Matrix(eig.vectors * inv.asDiagonal() * eig.vectors.transpose()));
}

namespace {

void require_simplex(std::span<const double> x, const char* what) {
  double total = 0.0;
  for (double v : x) {
    if (!(v >= -1e-12)) throw DomainError(std::string("majorizes: ") + what + " has a negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError(std::string("majorizes: ") + what + " does not sum to 1");
}

std::vector<double> sorted_descending(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

bool majorizes(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("majorizes: vectors differ in length");
  require_simplex(u, "u");
  require_simplex(v, "v");
  const auto su = sorted_descending(u);
  const auto sv = sorted_descending(v);
  double pu = 0.0;
  double pv = 0.0;
  for (std::size_t k = 0; k + 1 < su.size(); ++k) {
    pu += su[k];
    pv += sv[k];
    if (pu < pv - 1e-12) return false;
  }
  return true;
}

}  // namespace mixlab
