// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "mcbf/error.hpp"
#include "mcbf/linalg.hpp"
#include "mcbf/rng.hpp"
#include "oracles.hpp"

using namespace mcbf;
using mcbf::testing::random_hermitian;
using mcbf::testing::random_psd;

namespace {

double unitarity_error(const CMatrix& u) {
  CMatrix g = adjoint_times(u, u);
  g -= CMatrix::identity(u.cols());
  return g.frobenius_norm();
}

double reconstruction_error(const HermitianMatrix& h, const EigDecomposition& e) {
  return (h - e.reconstruct()).frobenius_norm();
}

}  // namespace

TEST_CASE("vector kernels") {
  const CVector a{{1, 2}, {0, -1}};
  const CVector b{{3, 0}, {1, 1}};
  // a^H b = (1-2i)*3 + (i)(1+i) = 3 - 6i + i - 1
  CHECK(dot(a.view(), b.view()) == cplx(2, -5));
  CHECK(norm_sq(a.view()) == doctest::Approx(6.0));
  CHECK(norm(b.view()) == doctest::Approx(std::sqrt(11.0)));
}

TEST_CASE("matrix products agree with explicit loops") {
  Rng rng(3, 0);
  CMatrix a(3, 4), b(4, 2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) a(i, j) = rng.complex_normal();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j) b(i, j) = rng.complex_normal();
  const CMatrix c = a * b;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      cplx s{0, 0};
      for (std::size_t t = 0; t < 4; ++t) s += a(i, t) * b(t, j);
      CHECK(std::abs(c(i, j) - s) < 1e-14);
    }
  const CMatrix ah_c = adjoint_times(a, c);
  const CMatrix ref = a.adjoint() * c;
  CHECK(mcbf::testing::max_abs_diff(ah_c, ref) < 1e-13);
}

TEST_CASE("Hermitian constructor validates symmetry and finiteness") {
  CMatrix m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = {0, 1};
  m(1, 0) = {0, -1};
  m(1, 1) = 2;
  CHECK_NOTHROW(HermitianMatrix{m});
  m(1, 0) = {0, 1};
  CHECK_THROWS_AS(HermitianMatrix{m}, InvalidInput);
  m(1, 0) = {0, -1};
  m(1, 1) = std::nan("");
  CHECK_THROWS_AS(HermitianMatrix{m}, InvalidInput);
  CHECK_THROWS_AS(HermitianMatrix{CMatrix(2, 3)}, InvalidInput);
}

TEST_CASE("herm_eig: identity") {
  const EigDecomposition e = herm_eig(HermitianMatrix::identity(2));
  REQUIRE(e.eigenvalues.size() == 2);
  CHECK(e.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(unitarity_error(e.eigenvectors) < 1e-10);
}

TEST_CASE("herm_eig: diagonal input is sorted descending") {
  const double d[] = {-1.0, 3.0};
  const EigDecomposition e = herm_eig(HermitianMatrix::diagonal(d));
  CHECK(e.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(-1.0));
}

TEST_CASE("herm_eig: 2x2 closed form") {
  // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
  CMatrix m(2, 2);
  m(0, 0) = 2;
  m(0, 1) = {0, 1};
  m(1, 0) = {0, -1};
  m(1, 1) = 2;
  const EigDecomposition e = herm_eig(HermitianMatrix(m));
  CHECK(e.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("herm_eig: random matrices reconstruct and stay unitary") {
  Rng rng(11, 0);
  for (std::size_t n : {1u, 2u, 3u, 6u, 8u, 16u, 32u}) {
    for (int rep = 0; rep < 3; ++rep) {
      const HermitianMatrix h = random_hermitian(n, rng);
      const EigDecomposition e = herm_eig(h);
      CHECK(reconstruction_error(h, e) <= 1e-9 * std::max(1.0, h.frobenius_norm()));
      CHECK(unitarity_error(e.eigenvectors) <= 1e-10);
      for (std::size_t i = 1; i < n; ++i) CHECK(e.eigenvalues[i - 1] >= e.eigenvalues[i]);
      double tr = 0.0;
      for (double l : e.eigenvalues) tr += l;
      CHECK(tr == doctest::Approx(h.trace()).epsilon(1e-10));
    }
  }
}

TEST_CASE("herm_eig: repeated and rank-deficient spectra") {
  Rng rng(12, 0);
  const HermitianMatrix p = random_psd(6, 2, rng);
  const EigDecomposition e = herm_eig(p);
  CHECK(reconstruction_error(p, e) <= 1e-9 * std::max(1.0, p.frobenius_norm()));
  CHECK(unitarity_error(e.eigenvectors) <= 1e-10);
  for (std::size_t i = 2; i < 6; ++i) CHECK(std::abs(e.eigenvalues[i]) < 1e-9 * e.eigenvalues[0]);

  const EigDecomposition z = herm_eig(HermitianMatrix::zeros(4));
  for (double l : z.eigenvalues) CHECK(l == 0.0);
  CHECK(unitarity_error(z.eigenvectors) <= 1e-10);
}

TEST_CASE("herm_eig: spectral shift") {
  Rng rng(13, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const HermitianMatrix h = random_hermitian(7, rng);
    const double c = 2.5 * rng.normal();
    HermitianMatrix shifted = h;
    shifted.add_identity(c);
    const auto e0 = herm_eig(h);
    const auto e1 = herm_eig(shifted);
    for (std::size_t i = 0; i < 7; ++i) CHECK(e1.eigenvalues[i] - e0.eigenvalues[i] == doctest::Approx(c).epsilon(1e-9));
  }
}

TEST_CASE("herm_eig: warm start gives the same spectrum") {
  Rng rng(14, 0);
  const HermitianMatrix h = random_hermitian(8, rng);
  const auto cold = herm_eig(h);
  HermitianMatrix nearby = h;
  nearby.add_outer(1e-3, mcbf::testing::random_cvector(8, rng).view());
  const auto warm = herm_eig(nearby, cold.eigenvectors);
  const auto ref = herm_eig(nearby);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(warm.eigenvalues[i] == doctest::Approx(ref.eigenvalues[i]).epsilon(1e-10));
  CHECK(reconstruction_error(nearby, warm) <= 1e-9 * nearby.frobenius_norm());
  CHECK(unitarity_error(warm.eigenvectors) <= 1e-10);
}

TEST_CASE("psd_project: examples") {
  Rng rng(15, 0);
  const HermitianMatrix p = random_psd(5, 5, rng);
  CHECK((psd_project(p) - p).frobenius_norm() <= 1e-9 * p.frobenius_norm());

  const double d[] = {2.0, -3.0};
  const HermitianMatrix proj = psd_project(HermitianMatrix::diagonal(d));
  CHECK(proj(0, 0).real() == doctest::Approx(2.0));
  CHECK(std::abs(proj(1, 1)) < 1e-12);
  CHECK(std::abs(proj(0, 1)) < 1e-12);
}

TEST_CASE("psd_project: matches eigen-clip oracle and is idempotent") {
  Rng rng(16, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + rep % 8;
    const HermitianMatrix h = random_hermitian(n, rng);
    // Oracle: clip via an explicit sum of rank-one terms.
    const auto e = herm_eig(h);
    HermitianMatrix oracle(n);
    for (std::size_t j = 0; j < n; ++j)
      if (e.eigenvalues[j] > 0) oracle.add_outer(e.eigenvalues[j], e.eigenvectors.column(j).view());
    const HermitianMatrix p = psd_project(h);
    CHECK((p - oracle).frobenius_norm() <= 1e-9 * std::max(1.0, h.frobenius_norm()));
    CHECK((psd_project(p) - p).frobenius_norm() <= 1e-9 * std::max(1.0, p.frobenius_norm()));
    for (int t = 0; t < 5; ++t) {
      CVector u = mcbf::testing::random_cvector(n, rng);
      const double s = 1.0 / norm(u.view());
      for (auto& x : u) x *= s;
      CHECK(p.quad_form(u.view()) >= -1e-10);
    }
    // Nearest point: moving toward any PSD matrix does not get closer.
    const HermitianMatrix other = random_psd(n, 2, rng);
    CHECK((h - p).frobenius_norm() <= (h - other).frobenius_norm() + 1e-12);
  }
}

TEST_CASE("PsdProjector agrees with psd_project over a sequence") {
  Rng rng(17, 0);
  PsdProjector proj;
  HermitianMatrix h = random_hermitian(6, rng);
  for (int step = 0; step < 10; ++step) {
    const HermitianMatrix a = proj.project(h);
    CHECK((a - psd_project(h)).frobenius_norm() <= 1e-9 * std::max(1.0, h.frobenius_norm()));
    h.add_outer(0.01 * rng.normal(), mcbf::testing::random_cvector(6, rng).view());
  }
}

TEST_CASE("lambda_max: examples") {
  const double tol = 1e-6;
  const double d[] = {5.0, 1.0};
  CHECK(std::abs(lambda_max(HermitianMatrix::diagonal(d), tol) - 5.0) <= 5.0 * tol);

  Rng rng(18, 0);
  const CVector h = mcbf::testing::random_cvector(6, rng);
  CHECK(lambda_max(HermitianMatrix::outer(h.view()), tol) ==
        doctest::Approx(norm_sq(h.view())).epsilon(tol));

  CHECK(lambda_max(HermitianMatrix::zeros(3), tol) == 0.0);

  for (int rep = 0; rep < 10; ++rep) {
    const HermitianMatrix p = random_psd(8, 8, rng);
    const double l1 = herm_eig(p).eigenvalues[0];
    const double est = lambda_max(p, tol);
    CHECK(est >= (1.0 - tol) * l1);
    CHECK(est <= l1 * (1.0 + 1e-12));
  }
}

TEST_CASE("lambda_max: real Gram matrices") {
  Rng rng(19, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 2 + rep;
    RealMatrix b(n, n);
    std::vector<std::vector<double>> g(n, std::vector<double>(n + 1));
    for (auto& row : g)
      for (double& v : row) v = rng.normal();
    CMatrix bc(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < n + 1; ++t) s += g[i][t] * g[j][t];
        b(i, j) = s;
        bc(i, j) = s;
      }
    const double l1 = herm_eig(HermitianMatrix(bc)).eigenvalues[0];
    const double est = lambda_max(b, 1e-6);
    CHECK(est >= (1.0 - 1e-6) * l1);
    CHECK(est <= l1 * (1.0 + 1e-12));
  }
}

TEST_CASE("herm_eig rejects non-finite input") {
  CMatrix m(2, 2);
  m(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(herm_eig(HermitianMatrix::symmetrized(m)), InvalidInput);
}
