// SPDX-License-Identifier: Apache-2.0
//
// Sequential convex approximation for
//
//   minimize ||W||_F^2  subject to  f_k(W) = max_q |h_{k,q}^H w_q|^2 >= 1.
//
// Each outer step replaces f_k by its supporting linearization at the current
// iterate, giving a strongly convex QP whose feasible set lies inside the
// original one; the QP is solved through its nonnegative-orthant dual with a
// Nesterov-accelerated projected gradient method.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mcbf/beamformer.hpp"
#include "mcbf/channel.hpp"
#include "mcbf/linalg.hpp"

namespace mcbf {

/// Frobenius inner product <G, W> = Re Tr(G^H W).
double inner(const CMatrix& g, const CMatrix& w);

/// (2/|I_k|) sum_{q in I_k} h_{k,q} h_{k,q}^H w_q placed in column q.
CMatrix subgradient(const BeamformerMatrix& w, const ChannelSet& cs, std::size_t k,
                    double tie_tol = 1e-9);

struct Linearization {
  std::vector<CMatrix> G;                         // M x Q per user
  std::vector<double> c;                          // f_k(W) - <G_k, W> - 1
  std::vector<std::vector<std::size_t>> active;  // I_k(W)
};

Linearization linearize(const BeamformerMatrix& w, const ChannelSet& cs, double tie_tol = 1e-9);

/// min ||x||^2  s.t.  Re(A x) + a >= 0, with x in C^n.
struct QpInstance {
  CMatrix A;              // K x n
  std::vector<double> a;  // K
  RealMatrix B;           // Re(A A^H)
  double lambda1 = 0.0;   // power-iteration estimate of lambda_max(B)
  double mu = 0.0;        // dual step 2 / (lambda1 (1 + 2 tol))
};

/// Completes B, lambda1 and mu from A and a.
QpInstance make_qp(CMatrix A, std::vector<double> a, double lambda_tol = 1e-6);

/// Subproblem at a feasible W_n. Row k of A is vec(G_k)^H so that
/// Re(A vec(W))_k = <G_k, W>, and a_k = c_k. Throws InvalidState if
/// min_k f_k(W_n) < 1 - 1e-9.
QpInstance build_qp(const BeamformerMatrix& w_n, const ChannelSet& cs, double tie_tol = 1e-9);

struct DfgpResult {
  CVector x;               // (1/2) A^H z
  std::vector<double> z;   // dual iterate, >= 0
  int iterations = 0;
  double projected_gradient_norm = 0.0;
};

/// Accelerated projected gradient on  min (1/4) z^T B z + a^T z, z >= 0,
/// started from z = 0. Exits early once the projected-gradient norm is below
/// pg_tol.
DfgpResult dfgp_solve(const QpInstance& qp, int inner_iters, double pg_tol = 1e-9);

struct ScaOptions {
  int inner_iters = 400;
  int max_outer = 200;
  double tie_tol = 1e-9;
  /// Outer stop when ||W^(n) - W^(n-1)||_F <= step_tol_scale * sqrt(M Q).
  double step_tol_scale = 1e-4;
  double pg_tol = 1e-9;
  std::uint64_t seed = 0;  // random feasible start when no W0 is given
};

struct ScaIterate {
  int outer_iter = 0;
  double cost = 0.0;
  double min_margin = 0.0;
  double step_norm = 0.0;
  int inner_iters = 0;
  bool restored = false;  // rescaled back onto the feasible set
  bool rejected = false;  // candidate raised the cost and was discarded
};

struct SolveReport {
  BeamformerMatrix final_W;
  double power = 0.0;
  std::vector<double> cost_trace;  // ||W^(n)||_F^2, n = 0..outer_iters
  std::vector<ScaIterate> iterates;
  int outer_iters = 0;
  std::vector<int> inner_iters_per_outer;
  bool converged = false;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds
  int restorations = 0;
};

/// Random feasible start: i.i.d. CN(0, 1) entries scaled so min_k f_k = 1.
/// Draws from Rng(seed, 0), moving to stream 1, 2, ... if a draw leaves some
/// user with zero response.
BeamformerMatrix make_feasible_start(const ChannelSet& cs, std::uint64_t seed);

/// Throws InvalidInput for a mis-shaped or infeasible W0.
SolveReport sca_solve(const ChannelSet& cs, const std::optional<BeamformerMatrix>& w0,
                      const ScaOptions& opts = {});

/// `outer_iter,cost,min_margin,step_norm` rows, the start point as iteration 0.
void write_trace_csv(std::ostream& out, const SolveReport& report);

}  // namespace mcbf
