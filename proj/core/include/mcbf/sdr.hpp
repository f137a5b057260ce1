// SPDX-License-Identifier: Apache-2.0
//
// Semidefinite relaxation of the joint scheduling/beamforming problem and the
// Gaussian-randomization recovery of rank-one beamformers.
//
//   minimize   sum_q Tr(W_q)
//   subject to sum_q h_{k,q}^H W_q h_{k,q} >= 1   for every user k
//              W_q PSD
//
// In the homogeneous scenario the problem is symmetric in {W_q}; it is solved
// on a single block (min Tr(W) s.t. h_k^H W h_k >= 1) and spread evenly over
// the Q channels.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mcbf/beamformer.hpp"
#include "mcbf/channel.hpp"
#include "mcbf/linalg.hpp"
#include "mcbf/rng.hpp"

namespace mcbf {

struct SdrOptions {
  double tol = 1e-7;       // relative primal/dual residual target
  int max_iter = 50000;
  bool exploit_symmetry = true;  // use the single-block form for homogeneous sets
};

struct SdrSolution {
  std::vector<HermitianMatrix> W_star;  // one M x M PSD block per channel
  double value = 0.0;                   // sum_q Tr(W_q*), the relaxation lower bound
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool reduced = false;  // solved through the symmetric single-block form
};

/// ADMM on the conic form: an equality-constrained least-squares step (closed
/// form through a K x K Cholesky factor) alternating with per-block PSD
/// projection, penalty tuned by residual balancing. Throws ConvergenceError if
/// the residuals are still above tol after max_iter iterations.
SdrSolution sdr_solve(const ChannelSet& cs, double tol = 1e-7, int max_iter = 50000);
SdrSolution sdr_solve(const ChannelSet& cs, const SdrOptions& opts);

/// Draws x ~ CN(0, W) as U Sigma^{1/2} v with v ~ CN(0, I). Eigenvalues below
/// 1e-12 * lambda_1 are treated as zero.
class CovarianceSampler {
 public:
  explicit CovarianceSampler(const HermitianMatrix& w);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rank() const noexcept { return rank_; }
  /// Consumes exactly dim() complex normals from rng.
  CVector sample(Rng& rng) const;

 private:
  std::size_t dim_ = 0;
  std::size_t rank_ = 0;
  CMatrix factor_;  // dim x rank, columns u_j sqrt(lambda_j)
};

struct RandomizationResult {
  BeamformerMatrix best_W;          // sqrt(p^(l*)) x^(l*), feasible
  double best_power = 0.0;          // v_SDR-G
  std::vector<double> trial_powers;  // p^(l), l = 0..L-1
  std::size_t best_index = 0;
  /// Diagnostic: best trial's power with channels serving no user switched
  /// off. Not used for best_power.
  double best_pruned_power = 0.0;
};

/// Gaussian randomization. Trial l uses Rng(seed, l), drawing the candidate
/// for channel 0 first, then 1, ...; ties in p^(l) resolve to the lowest l.
RandomizationResult randomize(const SdrSolution& sol, const ChannelSet& cs, std::size_t L,
                              std::uint64_t seed);

/// Uniform power 1 / min_k max_q c_{k,q} for the K x Q response matrix c.
/// Throws DegenerateInput if some user has an all-zero row.
double power_scale(const RealMatrix& c);

/// Per-user response matrix c_{k,q} = |h_{k,q}^H x_q|^2.
RealMatrix response_matrix(const BeamformerMatrix& x, const ChannelSet& cs);

struct Schedule {
  std::vector<std::size_t> assign;  // 0-based channel index per user
  std::vector<double> margin;       // |h_{k,assign[k]}^H w_{assign[k]}|^2
};

/// Each user goes to its best channel; ties resolve to the lowest index.
Schedule extract_schedule(const BeamformerMatrix& w, const ChannelSet& cs);

/// Worst-case approximation-ratio bound: 5QK (general) or 5 K^(1/Q)
/// (homogeneous).
double approximation_ratio_bound(const ChannelSet& cs);

}  // namespace mcbf
