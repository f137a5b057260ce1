// SPDX-License-Identifier: Apache-2.0
#include "mcbf/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcbf/error.hpp"

namespace mcbf {

namespace {

// Dense Cholesky factor of a symmetric positive definite matrix, lower
// triangle, row-major.
class Cholesky {
 public:
  explicit Cholesky(const RealMatrix& a) : n_(a.rows()), l_(n_ * n_, 0.0) {
    for (std::size_t j = 0; j < n_; ++j) {
      double d = a(j, j);
      for (std::size_t k = 0; k < j; ++k) d -= l_[j * n_ + k] * l_[j * n_ + k];
      if (!(d > 0.0)) throw Error("Cholesky: matrix is not positive definite");
      const double ljj = std::sqrt(d);
      l_[j * n_ + j] = ljj;
      for (std::size_t i = j + 1; i < n_; ++i) {
        double s = a(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l_[i * n_ + k] * l_[j * n_ + k];
        l_[i * n_ + j] = s / ljj;
      }
    }
  }

  void solve_in_place(std::vector<double>& b) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * b[k];
      b[i] = s / l_[i * n_ + i];
    }
    for (std::size_t i = n_; i-- > 0;) {
      double s = b[i];
      for (std::size_t k = i + 1; k < n_; ++k) s -= l_[k * n_ + i] * b[k];
      b[i] = s / l_[i * n_ + i];
    }
  }

 private:
  std::size_t n_;
  std::vector<double> l_;
};

double frob_sq(const HermitianMatrix& a) { return norm_sq(a.matrix().entries()); }

double frob_sq_diff(const HermitianMatrix& a, const HermitianMatrix& b) {
  const auto x = a.matrix().entries();
  const auto y = b.matrix().entries();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(x[i] - y[i]);
  return s;
}

// Lifted problem over `blocks` PSD blocks with constraint vectors g[k][b]:
//   min sum_b Tr(X_b)  s.t.  sum_b g_kb^H X_b g_kb - s_k = 1, s >= 0, X_b PSD.
// Split as x = (X, s) in the affine set, z = (Z, t) in the cone, x = z.
struct LiftedSolve {
  std::vector<HermitianMatrix> Z;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

LiftedSolve admm_lifted(std::size_t M, std::size_t K, std::size_t blocks,
                        const std::vector<std::vector<const CVector*>>& g, double tol,
                        int max_iter) {
  RealMatrix gram(K, K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j <= k; ++j) {
      double s = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) s += std::norm(dot(g[k][b]->view(), g[j][b]->view()));
      gram(k, j) = s;
      gram(j, k) = s;
    }
    gram(k, k) += 1.0;
  }
  const Cholesky chol(gram);

  // Penalty starting point from the scale of a trivially feasible lift:
  // X_b = I / (blocks * min_k sum_b ||g_kb||^2) has value ~ M / min ||g||^2.
  double min_gain = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) s += norm_sq(g[k][b]->view());
    min_gain = std::min(min_gain, s);
  }
  double rho = std::max(min_gain, 1e-12);

  std::vector<HermitianMatrix> X(blocks, HermitianMatrix(M));
  std::vector<HermitianMatrix> Z(blocks, HermitianMatrix(M));
  std::vector<HermitianMatrix> U(blocks, HermitianMatrix(M));
  std::vector<double> s(K, 0.0), t(K, 0.0), u(K, 0.0), lambda(K, 0.0);
  std::vector<PsdProjector> projectors(blocks);

  constexpr int kBalanceEvery = 10;
  constexpr int kMaxAdaptations = 40;
  int adaptations = 0;
  LiftedSolve out;
  for (int it = 1; it <= max_iter; ++it) {
    // Affine step: project (Z - U - I/rho, t - u) onto {sum_b <G_kb, X_b> - s = 1}.
    for (std::size_t b = 0; b < blocks; ++b) {
      X[b] = Z[b];
      X[b] -= U[b];
      X[b].add_identity(-1.0 / rho);
    }
    for (std::size_t k = 0; k < K; ++k) {
      double a = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) a += X[b].quad_form(g[k][b]->view());
      s[k] = t[k] - u[k];
      lambda[k] = a - s[k] - 1.0;
    }
    chol.solve_in_place(lambda);
    for (std::size_t b = 0; b < blocks; ++b)
      for (std::size_t k = 0; k < K; ++k) X[b].add_outer(-lambda[k], g[k][b]->view());
    for (std::size_t k = 0; k < K; ++k) s[k] += lambda[k];

    // Cone step.
    double dz = 0.0;
    double xn = 0.0;
    double zn = 0.0;
    double rp = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      HermitianMatrix v = X[b] + U[b];
      HermitianMatrix z_new = projectors[b].project(v);
      dz += frob_sq_diff(z_new, Z[b]);
      Z[b] = std::move(z_new);
      xn += frob_sq(X[b]);
      zn += frob_sq(Z[b]);
      rp += frob_sq_diff(X[b], Z[b]);
      U[b] += X[b];
      U[b] -= Z[b];
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double t_new = std::max(s[k] + u[k], 0.0);
      dz += (t_new - t[k]) * (t_new - t[k]);
      t[k] = t_new;
      xn += s[k] * s[k];
      zn += t[k] * t[k];
      rp += (s[k] - t[k]) * (s[k] - t[k]);
      u[k] += s[k] - t[k];
    }
    double un = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) un += frob_sq(U[b]);
    for (std::size_t k = 0; k < K; ++k) un += u[k] * u[k];

    const double primal = std::sqrt(rp) / std::max(std::sqrt(std::max(xn, zn)), 1e-300);
    const double dual = std::sqrt(dz) / std::max(std::sqrt(un), 1e-300);
    out.primal_residual = primal;
    out.dual_residual = dual;
    out.iterations = it;
    if (primal <= tol && dual <= tol) {
      out.Z = std::move(Z);
      return out;
    }

    // Residual balancing; the affine-step factor does not depend on rho. A
    // bounded number of updates keeps the penalty eventually fixed.
    if (it % kBalanceEvery == 0 && adaptations < kMaxAdaptations && (primal > 0.0 || dual > 0.0)) {
      const double f = dual == 0.0 ? 10.0 : std::clamp(std::sqrt(primal / dual), 0.1, 10.0);
      if (f > 2.0 || f < 0.5) {
        rho *= f;
        for (auto& ub : U) ub *= 1.0 / f;
        for (auto& uk : u) uk *= 1.0 / f;
        ++adaptations;
      }
    }
  }
  throw ConvergenceError("sdr_solve: ADMM did not reach the residual tolerance",
                         out.primal_residual, out.dual_residual, out.iterations);
}

}  // namespace

SdrSolution sdr_solve(const ChannelSet& cs, double tol, int max_iter) {
  SdrOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return sdr_solve(cs, opts);
}

SdrSolution sdr_solve(const ChannelSet& cs, const SdrOptions& opts) {
  cs.validate();
  if (!(opts.tol > 0.0) || opts.tol > 1e-3) throw InvalidInput("sdr_solve: tol must be in (0, 1e-3]");
  if (opts.max_iter < 1) throw InvalidInput("sdr_solve: max_iter must be >= 1");

  const bool reduce = opts.exploit_symmetry && cs.scenario == Scenario::Homogeneous;
  const std::size_t blocks = reduce ? 1 : cs.Q;
  // Solve with h scaled by 1/sqrt(c), c the weakest user's total gain, so the
  // lifted variables and the slacks share one scale; X = X' / c.
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cs.K; ++k) {
    double gain = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) gain += norm_sq(cs.at(k, b).view());
    c = std::min(c, gain);
  }
  if (!(c > 0.0)) throw DegenerateInput("sdr_solve: some user has an all-zero channel");
  const double inv_sqrt_c = 1.0 / std::sqrt(c);
  std::vector<CVector> scaled;
  scaled.reserve(cs.K * blocks);
  std::vector<std::vector<const CVector*>> g(cs.K, std::vector<const CVector*>(blocks));
  for (std::size_t k = 0; k < cs.K; ++k)
    for (std::size_t b = 0; b < blocks; ++b) {
      CVector h = cs.at(k, b);
      for (auto& x : h) x *= inv_sqrt_c;
      scaled.push_back(std::move(h));
    }
  for (std::size_t k = 0; k < cs.K; ++k)
    for (std::size_t b = 0; b < blocks; ++b) g[k][b] = &scaled[k * blocks + b];

  LiftedSolve lifted = admm_lifted(cs.M, cs.K, blocks, g, opts.tol, opts.max_iter);
  for (auto& z : lifted.Z) z *= 1.0 / c;

  SdrSolution sol;
  sol.primal_residual = lifted.primal_residual;
  sol.dual_residual = lifted.dual_residual;
  sol.iterations = lifted.iterations;
  sol.reduced = reduce;
  if (reduce) {
    sol.value = lifted.Z[0].trace();
    HermitianMatrix share = (1.0 / static_cast<double>(cs.Q)) * lifted.Z[0];
    sol.W_star.assign(cs.Q, share);
  } else {
    sol.value = 0.0;
    for (const auto& z : lifted.Z) sol.value += z.trace();
    sol.W_star = std::move(lifted.Z);
  }
  return sol;
}

CovarianceSampler::CovarianceSampler(const HermitianMatrix& w) : dim_(w.dim()) {
  const EigDecomposition eig = herm_eig(w);
  const double top = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.front();
  if (top > 0.0) {
    const double floor = 1e-12 * top;
    while (rank_ < dim_ && eig.eigenvalues[rank_] > floor) ++rank_;
  }
  factor_ = CMatrix(dim_, rank_);
  for (std::size_t j = 0; j < rank_; ++j) {
    const double sq = std::sqrt(eig.eigenvalues[j]);
    for (std::size_t r = 0; r < dim_; ++r) factor_(r, j) = eig.eigenvectors(r, j) * sq;
  }
}

CVector CovarianceSampler::sample(Rng& rng) const {
  std::vector<cplx> v(dim_);
  for (auto& e : v) e = rng.complex_normal();
  CVector x(dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    cplx s{0.0, 0.0};
    for (std::size_t j = 0; j < rank_; ++j) s += factor_(r, j) * v[j];
    x[r] = s;
  }
  return x;
}

double power_scale(const RealMatrix& c) {
  if (c.rows() == 0 || c.cols() == 0) throw InvalidInput("power_scale: empty response matrix");
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.rows(); ++k) {
    double best = 0.0;
    for (std::size_t q = 0; q < c.cols(); ++q) best = std::max(best, c(k, q));
    if (!(best > 0.0))
      throw DegenerateInput("power_scale: user " + std::to_string(k + 1) +
                            " has zero response on every channel");
    worst = std::min(worst, best);
  }
  return 1.0 / worst;
}

RealMatrix response_matrix(const BeamformerMatrix& x, const ChannelSet& cs) {
  require_matching(x, cs);
  RealMatrix c(cs.K, cs.Q);
  for (std::size_t k = 0; k < cs.K; ++k)
    for (std::size_t q = 0; q < cs.Q; ++q) c(k, q) = response(x, cs, k, q);
  return c;
}

RandomizationResult randomize(const SdrSolution& sol, const ChannelSet& cs, std::size_t L,
                              std::uint64_t seed) {
  cs.validate();
  if (L < 1) throw InvalidInput("randomize: L must be >= 1");
  if (sol.W_star.size() != cs.Q) throw InvalidInput("randomize: expected one block per channel");
  std::vector<CovarianceSampler> samplers;
  samplers.reserve(cs.Q);
  bool any = false;
  for (const auto& w : sol.W_star) {
    if (w.dim() != cs.M) throw InvalidInput("randomize: block size differs from M");
    samplers.emplace_back(w);
    any = any || samplers.back().rank() > 0;
  }
  if (!any) throw DegenerateInput("randomize: every relaxation block is zero");

  RandomizationResult out;
  out.trial_powers.assign(L, std::numeric_limits<double>::infinity());
  BeamformerMatrix best_x;
  double best_scale = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    Rng rng(seed, l);
    BeamformerMatrix x(cs.M, cs.Q);
    double energy = 0.0;
    for (std::size_t q = 0; q < cs.Q; ++q) {
      const CVector xq = samplers[q].sample(rng);
      x.matrix().set_column(q, xq.view());
      energy += norm_sq(xq.view());
    }
    double p;
    try {
      p = power_scale(response_matrix(x, cs));
    } catch (const DegenerateInput&) {
      continue;  // some user unreachable by this draw; p^(l) stays infinite
    }
    out.trial_powers[l] = p * energy;
    if (out.trial_powers[l] < out.trial_powers[out.best_index] || best_scale == 0.0) {
      out.best_index = l;
      best_x = x;
      best_scale = p;
    }
  }
  if (!std::isfinite(out.trial_powers[out.best_index]))
    throw DegenerateInput("randomize: no trial produced a feasible candidate");

  out.best_power = out.trial_powers[out.best_index];
  out.best_W = best_x;
  out.best_W *= std::sqrt(best_scale);

  const Schedule sched = extract_schedule(out.best_W, cs);
  std::vector<bool> used(cs.Q, false);
  for (std::size_t q : sched.assign) used[q] = true;
  out.best_pruned_power = 0.0;
  for (std::size_t q = 0; q < cs.Q; ++q)
    if (used[q]) out.best_pruned_power += norm_sq(out.best_W.column(q).view());
  return out;
}

Schedule extract_schedule(const BeamformerMatrix& w, const ChannelSet& cs) {
  require_matching(w, cs);
  Schedule s;
  s.assign.resize(cs.K);
  s.margin.resize(cs.K);
  for (std::size_t k = 0; k < cs.K; ++k) {
    std::size_t best_q = 0;
    double best = response(w, cs, k, 0);
    for (std::size_t q = 1; q < cs.Q; ++q) {
      const double r = response(w, cs, k, q);
      if (r > best) {
        best = r;
        best_q = q;
      }
    }
    s.assign[k] = best_q;
    s.margin[k] = best;
  }
  return s;
}

double approximation_ratio_bound(const ChannelSet& cs) {
  const double K = static_cast<double>(cs.K);
  const double Q = static_cast<double>(cs.Q);
  if (cs.scenario == Scenario::Homogeneous) return 5.0 * std::pow(K, 1.0 / Q);
  return 5.0 * Q * K;
}

}  // namespace mcbf
