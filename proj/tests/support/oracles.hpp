// SPDX-License-Identifier: Apache-2.0
//
// Reference computations used by the unit and acceptance tests. They are
// written independently of the library solvers: plain Gaussian elimination,
// exhaustive active-set enumeration and textbook statistics.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mcbf/channel.hpp"
#include "mcbf/linalg.hpp"
#include "mcbf/rng.hpp"

namespace mcbf::testing {

/// Solves the dense n x n system A x = b by Gaussian elimination with partial
/// pivoting; nullopt if a pivot falls below 1e-12 times the largest entry.
std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> A,
                                               std::vector<double> b);

struct QpOracleResult {
  CVector x;
  double objective = 0.0;
  std::vector<std::size_t> active;
};

/// min ||x||^2 s.t. Re(A x) + a >= 0 by enumerating every active subset,
/// solving the equality-constrained minimum-norm problem on it and keeping the
/// best feasible candidate. Throws InvalidInput if no subset is feasible.
QpOracleResult qp_active_set_oracle(const CMatrix& A, const std::vector<double>& a);

struct QpData {
  CMatrix A;
  std::vector<double> a;
};

/// K x n complex normal A and offsets a that make a random point x0 feasible;
/// about half of the constraints are tight at x0.
QpData random_feasible_qp(std::size_t K, std::size_t n, Rng& rng);

/// Asymptotic Kolmogorov-Smirnov p-value of the sample against the CDF.
double ks_pvalue(std::vector<double> sample, const std::function<double(double)>& cdf);

double normal_cdf(double x, double mean, double variance);

/// Random Hermitian matrix with i.i.d. complex normal entries above the
/// diagonal and real normal diagonal.
HermitianMatrix random_hermitian(std::size_t n, Rng& rng);
/// G G^H with G n x r complex normal.
HermitianMatrix random_psd(std::size_t n, std::size_t r, Rng& rng);
CVector random_cvector(std::size_t n, Rng& rng);
ChannelSet random_channels(std::size_t M, std::size_t K, std::size_t Q, Scenario s,
                           std::uint64_t seed);

double max_abs_diff(const CMatrix& a, const CMatrix& b);

/// Streaming (Welford) mean and sample variance.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};
Moments welford(const std::vector<double>& xs);

}  // namespace mcbf::testing
