#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>

namespace mixlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Real symmetric matrix. The stored matrix is (M + Mᵀ)/2 of whatever was
/// passed in, so downstream eigensolves always see exact symmetry.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index d);
  static SymMatrix zero(Eigen::Index d);
  static SymMatrix diagonal(const Vector& diag);
  static SymMatrix scalar(double value) { return diagonal(Vector::Constant(1, value)); }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;
  friend SymMatrix operator*(double s, const SymMatrix& a) { return a * s; }

 private:
  Matrix m_;
};

struct EigenDecomposition {
  Vector values;  // ascending
  Matrix vectors;
};

EigenDecomposition eigen_decompose(const SymMatrix& a);
double min_eigenvalue(const SymMatrix& a);
/// Largest absolute eigenvalue.
double op_norm(const SymMatrix& a);
/// Largest singular value of a general square matrix.
double op_norm(const Matrix& a);

/// f(A) = V diag(f(λ)) Vᵀ.
SymMatrix apply_spectral(const SymMatrix& a, const std::function<double(double)>& f);

/// Result of testing A ⪯ B.
struct PsdVerdict {
  double min_eigenvalue_of_difference = 0.0;
  double tolerance = 0.0;
  bool holds = false;
};

/// 1e-9·(1 + ‖A‖_op + ‖B‖_op).
double default_psd_tolerance(const SymMatrix& a, const SymMatrix& b);

/// Tests A ⪯ B through the smallest eigenvalue of B − A.
PsdVerdict psd_leq(const SymMatrix& a, const SymMatrix& b);
PsdVerdict psd_leq(const SymMatrix& a, const SymMatrix& b, double tol);

Vector singular_values(const Matrix& a);

/// (Σ σᵢᵖ)^{1/p}; p = +inf gives the operator norm. Throws DomainError for p < 1.
double schatten_norm(const Matrix& a, double p);
/// Schatten norm from precomputed singular values.
double schatten_norm_from_singular_values(const Vector& sv, double p);

/// PSD square root. Eigenvalues in [-1e-12·(1+‖A‖), 0) are clamped to zero;
/// anything more negative is a DomainError.
SymMatrix sqrt_psd(const SymMatrix& a);

/// Inverse of a positive-definite matrix; DomainError if not positive definite.
SymMatrix inverse_pd(const SymMatrix& a);

/// True iff v ⪯_m u, i.e. the descending partial sums of u dominate those
/// of v (slack 1e-12). Both arguments must lie on the simplex.
bool majorizes(std::span<const double> u, std::span<const double> v);

}  // namespace mixlab
