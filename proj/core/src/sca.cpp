// SPDX-License-Identifier: Apache-2.0
#include "mcbf/sca.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "mcbf/error.hpp"
#include "mcbf/rng.hpp"

namespace mcbf {

double inner(const CMatrix& g, const CMatrix& w) {
  if (g.rows() != w.rows() || g.cols() != w.cols()) throw InvalidInput("inner: shape mismatch");
  return dot(g.entries(), w.entries()).real();
}

CMatrix subgradient(const BeamformerMatrix& w, const ChannelSet& cs, std::size_t k,
                    double tie_tol) {
  const UserQos qos = eval_fk(w, cs, k, tie_tol);
  CMatrix g(cs.M, cs.Q);
  const double weight = 2.0 / static_cast<double>(qos.active.size());
  for (std::size_t q : qos.active) {
    const CVector& h = cs.at(k, q);
    cplx hw{0.0, 0.0};
    for (std::size_t m = 0; m < cs.M; ++m) hw += std::conj(h[m]) * w(m, q);
    for (std::size_t m = 0; m < cs.M; ++m) g(m, q) = weight * h[m] * hw;
  }
  return g;
}

Linearization linearize(const BeamformerMatrix& w, const ChannelSet& cs, double tie_tol) {
  require_matching(w, cs);
  Linearization lin;
  lin.G.reserve(cs.K);
  lin.c.reserve(cs.K);
  lin.active.reserve(cs.K);
  for (std::size_t k = 0; k < cs.K; ++k) {
    const UserQos qos = eval_fk(w, cs, k, tie_tol);
    CMatrix g = subgradient(w, cs, k, tie_tol);
    lin.c.push_back(qos.value - inner(g, w.matrix()) - 1.0);
    lin.G.push_back(std::move(g));
    lin.active.push_back(qos.active);
  }
  return lin;
}

QpInstance make_qp(CMatrix A, std::vector<double> a, double lambda_tol) {
  if (A.rows() != a.size()) throw InvalidInput("make_qp: A and a disagree on the row count");
  QpInstance qp;
  const std::size_t K = A.rows();
  const std::size_t n = A.cols();
  qp.B = RealMatrix(K, K);
  for (std::size_t k = 0; k < K; ++k) {
    const cplx* ak = &A(k, 0);
    for (std::size_t j = 0; j <= k; ++j) {
      const cplx* aj = &A(j, 0);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        s += ak[i].real() * aj[i].real() + ak[i].imag() * aj[i].imag();
      qp.B(k, j) = s;
      qp.B(j, k) = s;
    }
  }
  qp.lambda1 = lambda_max(qp.B, lambda_tol);
  qp.mu = qp.lambda1 > 0.0 ? 2.0 / (qp.lambda1 * (1.0 + 2.0 * lambda_tol)) : 0.0;
  qp.A = std::move(A);
  qp.a = std::move(a);
  return qp;
}

QpInstance build_qp(const BeamformerMatrix& w_n, const ChannelSet& cs, double tie_tol) {
  require_matching(w_n, cs);
  const double worst = min_fk(w_n, cs);
  if (worst < 1.0 - 1e-9)
    throw InvalidState("build_qp: linearization point is infeasible (min_k f_k = " +
                       std::to_string(worst) + ")");
  const Linearization lin = linearize(w_n, cs, tie_tol);
  const std::size_t n = cs.M * cs.Q;
  CMatrix A(cs.K, n);
  for (std::size_t k = 0; k < cs.K; ++k)
    for (std::size_t q = 0; q < cs.Q; ++q)
      for (std::size_t m = 0; m < cs.M; ++m) A(k, q * cs.M + m) = std::conj(lin.G[k](m, q));
  return make_qp(std::move(A), lin.c);
}

DfgpResult dfgp_solve(const QpInstance& qp, int inner_iters, double pg_tol) {
  if (inner_iters < 1) throw InvalidInput("dfgp_solve: inner_iters must be >= 1");
  const std::size_t K = qp.a.size();
  const std::size_t n = qp.A.cols();
  DfgpResult out;
  out.z.assign(K, 0.0);

  auto projected_gradient = [&](const std::vector<double>& z) {
    std::vector<double> bz(K);
    qp.B.multiply(z, bz);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double grad = 0.5 * bz[k] + qp.a[k];
      const double r = z[k] - std::max(z[k] - grad, 0.0);
      s += r * r;
    }
    return std::sqrt(s);
  };

  if (qp.mu > 0.0) {
    std::vector<double> z_prev(K, 0.0), z_tilde(K, 0.0), bz(K), z(K);
    for (int l = 1; l <= inner_iters; ++l) {
      qp.B.multiply(z_tilde, bz);
      double gm = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        z[k] = std::max(z_tilde[k] - qp.mu * (0.5 * bz[k] + qp.a[k]), 0.0);
        const double d = (z_tilde[k] - z[k]) / qp.mu;
        gm += d * d;
      }
      const double momentum = static_cast<double>(l - 1) / static_cast<double>(l + 2);
      for (std::size_t k = 0; k < K; ++k) {
        z_tilde[k] = z[k] + momentum * (z[k] - z_prev[k]);
        z_prev[k] = z[k];
      }
      out.iterations = l;
      if (std::sqrt(gm) <= pg_tol) break;
    }
    out.z = z_prev;
  } else {
    // B = 0: the dual objective is linear; z = 0 is optimal iff a >= 0.
    out.iterations = 0;
  }
  out.projected_gradient_norm = projected_gradient(out.z);

  out.x = CVector(n);
  for (std::size_t k = 0; k < K; ++k) {
    if (out.z[k] == 0.0) continue;
    const cplx* ak = &qp.A(k, 0);
    const double zk = 0.5 * out.z[k];
    for (std::size_t i = 0; i < n; ++i) out.x[i] += std::conj(ak[i]) * zk;
  }
  return out;
}

BeamformerMatrix make_feasible_start(const ChannelSet& cs, std::uint64_t seed) {
  cs.validate();
  for (std::uint64_t stream = 0;; ++stream) {
    Rng rng(seed, stream);
    BeamformerMatrix w(cs.M, cs.Q);
    for (std::size_t m = 0; m < cs.M; ++m)
      for (std::size_t q = 0; q < cs.Q; ++q) w(m, q) = rng.complex_normal();
    const double worst = min_fk(w, cs);
    if (worst > 0.0 && std::isfinite(worst)) {
      w *= 1.0 / std::sqrt(worst);
      return w;
    }
    if (stream > 1000) throw DegenerateInput("make_feasible_start: some user has a zero channel");
  }
}

SolveReport sca_solve(const ChannelSet& cs, const std::optional<BeamformerMatrix>& w0,
                      const ScaOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  cs.validate();
  if (opts.inner_iters < 1 || opts.max_outer < 1)
    throw InvalidInput("sca_solve: iteration budgets must be >= 1");

  BeamformerMatrix w;
  if (w0) {
    if (w0->M() != cs.M || w0->Q() != cs.Q)
      throw InvalidInput("sca_solve: initial point has the wrong shape");
    if (min_fk(*w0, cs) < 1.0 - 1e-9) throw InvalidInput("sca_solve: initial point is infeasible");
    w = *w0;
  } else {
    w = make_feasible_start(cs, opts.seed);
  }

  SolveReport rep;
  rep.seed = opts.seed;
  const double step_tol = opts.step_tol_scale * std::sqrt(static_cast<double>(cs.M * cs.Q));
  double cost = w.power();
  rep.cost_trace.push_back(cost);
  rep.iterates.push_back({0, cost, min_fk(w, cs), 0.0, 0, false, false});

  for (int n = 1; n <= opts.max_outer; ++n) {
    const QpInstance qp = build_qp(w, cs, opts.tie_tol);
    const DfgpResult sub = dfgp_solve(qp, opts.inner_iters, opts.pg_tol);
    BeamformerMatrix cand = BeamformerMatrix::from_vec(cs.M, cs.Q, sub.x.view());

    ScaIterate rec;
    rec.outer_iter = n;
    rec.inner_iters = sub.iterations;
    double margin = min_fk(cand, cs);
    if (margin < 1.0) {
      // Finite inner budget: the linearized constraints hold only approximately.
      if (margin > 0.0) {
        cand *= 1.0 / std::sqrt(margin);
        margin = min_fk(cand, cs);
        rec.restored = true;
        ++rep.restorations;
      } else {
        cand = w;
        margin = min_fk(w, cs);
        rec.rejected = true;
      }
    }
    if (cand.power() > cost) {
      cand = w;
      margin = min_fk(w, cs);
      rec.rejected = true;
    }

    CMatrix diff = cand.matrix();
    diff -= w.matrix();
    rec.step_norm = diff.frobenius_norm();
    w = std::move(cand);
    cost = w.power();
    rec.cost = cost;
    rec.min_margin = margin;
    rep.cost_trace.push_back(cost);
    rep.iterates.push_back(rec);
    rep.inner_iters_per_outer.push_back(sub.iterations);
    rep.outer_iters = n;
    if (rec.step_norm <= step_tol) {
      rep.converged = true;
      break;
    }
  }

  rep.final_W = w;
  rep.power = cost;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void write_trace_csv(std::ostream& out, const SolveReport& report) {
  out << "outer_iter,cost,min_margin,step_norm\n";
  char buf[128];
  for (const auto& it : report.iterates) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", it.outer_iter, it.cost,
                  it.min_margin, it.step_norm);
    out << buf;
  }
}

}  // namespace mcbf
