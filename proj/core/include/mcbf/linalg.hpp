// SPDX-License-Identifier: Apache-2.0
//
// Dense complex kernels used by the relaxation and restriction solvers. Sizes
// here are small (n <= 64 for eigenproblems, a few thousand entries for the
// constraint operators), so everything is plain row-major storage.
#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mcbf {

using cplx = std::complex<double>;

class CVector {
 public:
  CVector() = default;
  explicit CVector(std::size_t dim) : v_(dim) {}
  CVector(std::initializer_list<cplx> init) : v_(init) {}
  explicit CVector(std::vector<cplx> entries) : v_(std::move(entries)) {}

  std::size_t dim() const noexcept { return v_.size(); }
  std::size_t size() const noexcept { return v_.size(); }
  bool empty() const noexcept { return v_.empty(); }

  cplx& operator[](std::size_t i) { return v_[i]; }
  const cplx& operator[](std::size_t i) const { return v_[i]; }

  cplx* data() noexcept { return v_.data(); }
  const cplx* data() const noexcept { return v_.data(); }
  auto begin() noexcept { return v_.begin(); }
  auto end() noexcept { return v_.end(); }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }

  std::span<const cplx> view() const noexcept { return v_; }
  std::span<cplx> view() noexcept { return v_; }

  bool all_finite() const noexcept;

  friend bool operator==(const CVector&, const CVector&) = default;

 private:
  std::vector<cplx> v_;
};

/// a^H b
cplx dot(std::span<const cplx> a, std::span<const cplx> b) noexcept;
double norm_sq(std::span<const cplx> a) noexcept;
double norm(std::span<const cplx> a) noexcept;

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}
  CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> row_major);

  static CMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  cplx* data() noexcept { return a_.data(); }
  const cplx* data() const noexcept { return a_.data(); }
  std::span<const cplx> entries() const noexcept { return a_; }
  std::span<cplx> entries() noexcept { return a_; }

  CMatrix adjoint() const;
  CVector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const cplx> values);

  double frobenius_norm() const noexcept;
  bool all_finite() const noexcept;

  CMatrix& operator+=(const CMatrix& o);
  CMatrix& operator-=(const CMatrix& o);
  CMatrix& operator*=(double s) noexcept;

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> a_;
};

CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CVector operator*(const CMatrix& a, std::span<const cplx> x);
/// A^H B without forming A^H.
CMatrix adjoint_times(const CMatrix& a, const CMatrix& b);

/// Square matrix with H = H^H up to 1e-12 relative Frobenius error. The stored
/// entries are exactly conjugate-symmetric (the constructor averages H and H^H).
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(std::size_t n) : m_(n, n) {}
  /// Throws InvalidInput when `m` is not square, not finite, or not Hermitian.
  explicit HermitianMatrix(const CMatrix& m);

  static HermitianMatrix zeros(std::size_t n) { return HermitianMatrix(n); }
  static HermitianMatrix identity(std::size_t n);
  static HermitianMatrix diagonal(std::span<const double> d);
  /// x x^H
  static HermitianMatrix outer(std::span<const cplx> x);
  /// Symmetrizes without the tolerance check; for internal arithmetic whose
  /// result is Hermitian up to rounding.
  static HermitianMatrix symmetrized(CMatrix m);

  std::size_t dim() const noexcept { return m_.rows(); }
  const CMatrix& matrix() const noexcept { return m_; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  double trace() const noexcept;
  /// Re(x^H H x)
  double quad_form(std::span<const cplx> x) const noexcept;
  double frobenius_norm() const noexcept { return m_.frobenius_norm(); }

  /// this += alpha * x x^H
  void add_outer(double alpha, std::span<const cplx> x) noexcept;
  /// this += alpha * I
  void add_identity(double alpha) noexcept;
  HermitianMatrix& operator+=(const HermitianMatrix& o);
  HermitianMatrix& operator-=(const HermitianMatrix& o);
  HermitianMatrix& operator*=(double s) noexcept;

 private:
  CMatrix m_;
};

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator*(double s, HermitianMatrix a);

/// Real row-major matrix; used for the real Gram matrices of the dual QP.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  const double* data() const noexcept { return a_.data(); }

  void multiply(std::span<const double> x, std::span<double> y) const noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

struct EigDecomposition {
  std::vector<double> eigenvalues;  // descending
  CMatrix eigenvectors;             // column j pairs with eigenvalues[j]

  HermitianMatrix reconstruct() const;
};

/// Hermitian eigendecomposition by cyclic Jacobi on the real symmetric
/// embedding [[Re H, -Im H], [Im H, Re H]] of size 2n.
EigDecomposition herm_eig(const HermitianMatrix& h);

/// Warm-started variant: `basis` is a unitary matrix that nearly diagonalizes
/// `h` (typically the eigenvectors from a previous, nearby call). Produces the
/// same decomposition as herm_eig up to rounding, in fewer sweeps.
EigDecomposition herm_eig(const HermitianMatrix& h, const CMatrix& basis);

/// Nearest PSD matrix in Frobenius norm: U max(Lambda, 0) U^H.
HermitianMatrix psd_project(const HermitianMatrix& h);
HermitianMatrix psd_project(const EigDecomposition& eig);

/// Repeated projections of slowly-changing matrices (one per ADMM block);
/// keeps the previous eigenbasis to warm-start the next decomposition.
class PsdProjector {
 public:
  HermitianMatrix project(const HermitianMatrix& h);
  const EigDecomposition& last() const noexcept { return last_; }

 private:
  EigDecomposition last_;
  bool warm_ = false;
};

/// Largest eigenvalue of a PSD matrix by power iteration from the normalized
/// all-ones vector. Stops when the Rayleigh-quotient residual is below
/// tol * lambda, so the estimate is within a factor (1 - tol) of lambda_1 for
/// generic inputs. Returns 0 for the zero matrix.
double lambda_max(const HermitianMatrix& b, double tol = 1e-6);
double lambda_max(const RealMatrix& b, double tol = 1e-6);

}  // namespace mcbf
