// SPDX-License-Identifier: Apache-2.0
#include "mcbf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcbf/error.hpp"

namespace mcbf {

namespace {

bool finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_same_shape(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidInput("matrix shape mismatch");
}

// Cyclic Jacobi on a real symmetric n x n matrix in full row-major storage.
// On return the diagonal of `a` holds the eigenvalues and row i of `vt` the
// eigenvector for a(i,i).
void jacobi_symmetric(std::vector<double>& a, std::size_t n, std::vector<double>& vt,
                      double off_tol) {
  vt.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;
  if (n < 2) return;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
  };

  const double skip = off_tol / static_cast<double>(n);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_norm() <= off_tol) return;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) <= skip) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = 0.5 * (aqq - app) / apq;
        double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r * n + p];
          const double arq = a[r * n + q];
          const double new_rp = arp - s * (arq + tau * arp);
          const double new_rq = arq + s * (arp - tau * arq);
          a[r * n + p] = new_rp;
          a[p * n + r] = new_rp;
          a[r * n + q] = new_rq;
          a[q * n + r] = new_rq;
        }
        double* vp = &vt[p * n];
        double* vq = &vt[q * n];
        for (std::size_t r = 0; r < n; ++r) {
          const double g = vp[r];
          const double h = vq[r];
          vp[r] = g - s * (h + tau * g);
          vq[r] = h + s * (g - tau * h);
        }
      }
    }
  }
  if (off_norm() > off_tol) throw Error("herm_eig: Jacobi sweeps did not converge");
}

// Eigendecomposition of h in the basis it is given in; returns eigenvalues
// and eigenvectors (columns) sorted descending.
EigDecomposition eig_direct(const CMatrix& h, double scale_norm) {
  const std::size_t n = h.rows();
  const std::size_t n2 = 2 * n;
  std::vector<double> s(n2 * n2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double re = h(i, j).real();
      const double im = h(i, j).imag();
      s[i * n2 + j] = re;
      s[(i + n) * n2 + (j + n)] = re;
      s[i * n2 + (j + n)] = -im;
      s[(i + n) * n2 + j] = im;
    }
  }
  std::vector<double> vt;
  jacobi_symmetric(s, n2, vt, 1e-12 * scale_norm);

  std::vector<std::size_t> order(n2);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return s[x * n2 + x] > s[y * n2 + y]; });

  // Each complex eigenvector v shows up twice in the embedding, as (Re v, Im v)
  // and as the image of i*v. Keep one representative per complex direction.
  std::vector<std::vector<cplx>> chosen;
  chosen.reserve(n);
  auto residual_of = [&](std::size_t idx) {
    std::vector<cplx> y(n);
    for (std::size_t r = 0; r < n; ++r) y[r] = {vt[idx * n2 + r], vt[idx * n2 + n + r]};
    for (const auto& u : chosen) {
      const cplx proj = dot(u, y);
      for (std::size_t r = 0; r < n; ++r) y[r] -= proj * u[r];
    }
    return y;
  };
  auto accept = [&](std::vector<cplx> y) {
    const double nr = norm(y);
    for (auto& e : y) e /= nr;
    chosen.push_back(std::move(y));
  };
  std::vector<bool> used(n2, false);
  for (std::size_t k = 0; k < n2 && chosen.size() < n; ++k) {
    auto y = residual_of(order[k]);
    if (norm_sq(y) > 0.5) {
      used[order[k]] = true;
      accept(std::move(y));
    }
  }
  while (chosen.size() < n) {
    double best = -1.0;
    std::vector<cplx> best_y;
    std::size_t best_idx = 0;
    for (std::size_t idx = 0; idx < n2; ++idx) {
      if (used[idx]) continue;
      auto y = residual_of(idx);
      const double r = norm_sq(y);
      if (r > best) {
        best = r;
        best_y = std::move(y);
        best_idx = idx;
      }
    }
    used[best_idx] = true;
    accept(std::move(best_y));
  }

  std::vector<double> values(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Rayleigh quotient y^H h y
    double rq = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      cplx row{0.0, 0.0};
      for (std::size_t c = 0; c < n; ++c) row += h(r, c) * chosen[j][c];
      rq += (std::conj(chosen[j][r]) * row).real();
    }
    values[j] = rq;
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });

  EigDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = CMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = values[perm[j]];
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, j) = chosen[perm[j]][r];
  }
  return out;
}

template <class MatVec>
double power_iteration(std::size_t n, double tol, MatVec&& matvec) {
  if (n == 0) return 0.0;
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> w(n);
  double rho = 0.0;
  constexpr int kMaxIter = 100000;
  for (int it = 0; it < kMaxIter; ++it) {
    matvec(v, w);
    rho = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
    double wn = 0.0;
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wn += w[i] * w[i];
      const double r = w[i] - rho * v[i];
      res += r * r;
    }
    wn = std::sqrt(wn);
    if (wn == 0.0) return 0.0;
    if (std::sqrt(res) <= tol * std::abs(rho)) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
  }
  return rho;
}

}  // namespace

bool CVector::all_finite() const noexcept {
  return std::all_of(v_.begin(), v_.end(), finite);
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) noexcept {
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm_sq(std::span<const cplx> a) noexcept {
  double s = 0.0;
  for (const auto& z : a) s += std::norm(z);
  return s;
}

double norm(std::span<const cplx> a) noexcept { return std::sqrt(norm_sq(a)); }

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> row_major)
    : rows_(rows), cols_(cols), a_(std::move(row_major)) {
  if (a_.size() != rows * cols) throw InvalidInput("CMatrix: entry count does not match shape");
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
  return t;
}

CVector CMatrix::column(std::size_t j) const {
  CVector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void CMatrix::set_column(std::size_t j, std::span<const cplx> values) {
  if (values.size() != rows_) throw InvalidInput("set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

double CMatrix::frobenius_norm() const noexcept { return norm(a_); }

bool CMatrix::all_finite() const noexcept { return std::all_of(a_.begin(), a_.end(), finite); }

CMatrix& CMatrix::operator+=(const CMatrix& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(double s) noexcept {
  for (auto& z : a_) z *= s;
  return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw InvalidInput("matrix product shape mismatch");
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx* ci = &c(i, 0);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      const cplx* bk = &b(k, 0);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

CMatrix adjoint_times(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw InvalidInput("adjoint product shape mismatch");
  CMatrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const cplx* bk = &b(k, 0);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const cplx aki = std::conj(a(k, i));
      cplx* ci = &c(i, 0);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }

CVector operator*(const CMatrix& a, std::span<const cplx> x) {
  if (a.cols() != x.size()) throw InvalidInput("matrix-vector shape mismatch");
  CVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx s{0.0, 0.0};
    const cplx* ai = &a(i, 0);
    for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

HermitianMatrix::HermitianMatrix(const CMatrix& m) : m_(m) {
  if (m.rows() != m.cols()) throw InvalidInput("HermitianMatrix: matrix is not square");
  if (!m.all_finite()) throw InvalidInput("HermitianMatrix: non-finite entries");
  const std::size_t n = m.rows();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) asym += std::norm(m(i, j) - std::conj(m(j, i)));
  if (std::sqrt(asym) > 1e-12 * m.frobenius_norm())
    throw InvalidInput("HermitianMatrix: matrix is not conjugate-symmetric");
  *this = symmetrized(m);
}

HermitianMatrix HermitianMatrix::identity(std::size_t n) {
  HermitianMatrix h(n);
  for (std::size_t i = 0; i < n; ++i) h.m_(i, i) = 1.0;
  return h;
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> d) {
  HermitianMatrix h(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) h.m_(i, i) = d[i];
  return h;
}

HermitianMatrix HermitianMatrix::outer(std::span<const cplx> x) {
  HermitianMatrix h(x.size());
  h.add_outer(1.0, x);
  return h;
}

HermitianMatrix HermitianMatrix::symmetrized(CMatrix m) {
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = m(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = avg;
      m(j, i) = std::conj(avg);
    }
  }
  HermitianMatrix h;
  h.m_ = std::move(m);
  return h;
}

double HermitianMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += m_(i, i).real();
  return t;
}

double HermitianMatrix::quad_form(std::span<const cplx> x) const noexcept {
  const std::size_t n = dim();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cplx row{0.0, 0.0};
    const cplx* hi = &m_(i, 0);
    for (std::size_t j = 0; j < n; ++j) row += hi[j] * x[j];
    s += (std::conj(x[i]) * row).real();
  }
  return s;
}

void HermitianMatrix::add_outer(double alpha, std::span<const cplx> x) noexcept {
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) {
    const cplx ax = alpha * x[i];
    cplx* hi = &m_(i, 0);
    for (std::size_t j = 0; j < n; ++j) hi[j] += ax * std::conj(x[j]);
  }
}

void HermitianMatrix::add_identity(double alpha) noexcept {
  for (std::size_t i = 0; i < dim(); ++i) m_(i, i) += alpha;
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  m_ += o.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& o) {
  m_ -= o.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) noexcept {
  m_ *= s;
  return *this;
}

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

void RealMatrix::multiply(std::span<const double> x, std::span<double> y) const noexcept {
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* ai = &a_[i * cols_];
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += ai[j] * x[j];
    y[i] = s;
  }
}

HermitianMatrix EigDecomposition::reconstruct() const {
  const std::size_t n = eigenvalues.size();
  HermitianMatrix h(n);
  std::vector<cplx> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < n; ++r) col[r] = eigenvectors(r, j);
    h.add_outer(eigenvalues[j], col);
  }
  return HermitianMatrix::symmetrized(h.matrix());
}

EigDecomposition herm_eig(const HermitianMatrix& h) {
  if (!h.matrix().all_finite()) throw InvalidInput("herm_eig: non-finite entries");
  return eig_direct(h.matrix(), h.frobenius_norm());
}

EigDecomposition herm_eig(const HermitianMatrix& h, const CMatrix& basis) {
  if (!h.matrix().all_finite()) throw InvalidInput("herm_eig: non-finite entries");
  if (basis.rows() != h.dim() || basis.cols() != h.dim())
    throw InvalidInput("herm_eig: warm-start basis has the wrong shape");
  const CMatrix rotated = adjoint_times(basis, h.matrix() * basis);
  const HermitianMatrix rh = HermitianMatrix::symmetrized(rotated);
  EigDecomposition local = eig_direct(rh.matrix(), h.frobenius_norm());
  local.eigenvectors = basis * local.eigenvectors;
  return local;
}

HermitianMatrix psd_project(const EigDecomposition& eig) {
  const std::size_t n = eig.eigenvalues.size();
  std::size_t positive = 0;
  for (double v : eig.eigenvalues)
    if (v > 0.0) ++positive;
  std::vector<cplx> col(n);
  auto column = [&](std::size_t j) {
    for (std::size_t r = 0; r < n; ++r) col[r] = eig.eigenvectors(r, j);
    return std::span<const cplx>(col);
  };
  HermitianMatrix out(n);
  // Sum whichever side of the spectrum has fewer terms.
  if (positive <= n - positive) {
    for (std::size_t j = 0; j < positive; ++j) out.add_outer(eig.eigenvalues[j], column(j));
  } else {
    out = eig.reconstruct();
    for (std::size_t j = positive; j < n; ++j) out.add_outer(-eig.eigenvalues[j], column(j));
  }
  return HermitianMatrix::symmetrized(out.matrix());
}

HermitianMatrix psd_project(const HermitianMatrix& h) { return psd_project(herm_eig(h)); }

HermitianMatrix PsdProjector::project(const HermitianMatrix& h) {
  if (warm_ && last_.eigenvectors.rows() == h.dim()) {
    last_ = herm_eig(h, last_.eigenvectors);
  } else {
    last_ = herm_eig(h);
    warm_ = true;
  }
  std::size_t positive = 0;
  for (double v : last_.eigenvalues)
    if (v > 0.0) ++positive;
  if (positive == h.dim()) return h;
  if (positive == 0) return HermitianMatrix(h.dim());
  if (positive <= h.dim() - positive) return psd_project(last_);
  HermitianMatrix out = h;
  std::vector<cplx> col(h.dim());
  for (std::size_t j = positive; j < h.dim(); ++j) {
    for (std::size_t r = 0; r < h.dim(); ++r) col[r] = last_.eigenvectors(r, j);
    out.add_outer(-last_.eigenvalues[j], col);
  }
  return HermitianMatrix::symmetrized(out.matrix());
}

double lambda_max(const HermitianMatrix& b, double tol) {
  const std::size_t n = b.dim();
  // For Hermitian b the power iteration runs on the real embedding: x -> Re/Im.
  return power_iteration(2 * n, tol, [&](const std::vector<double>& v, std::vector<double>& w) {
    for (std::size_t i = 0; i < n; ++i) {
      double re = 0.0;
      double im = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const cplx z = b(i, j) * cplx(v[j], v[n + j]);
        re += z.real();
        im += z.imag();
      }
      w[i] = re;
      w[n + i] = im;
    }
  });
}

double lambda_max(const RealMatrix& b, double tol) {
  if (b.rows() != b.cols()) throw InvalidInput("lambda_max: matrix is not square");
  return power_iteration(b.rows(), tol, [&](const std::vector<double>& v, std::vector<double>& w) {
    b.multiply(v, w);
  });
}

}  // namespace mcbf
