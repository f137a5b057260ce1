// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mcbf/error.hpp"
#include "mcbf/sca.hpp"
#include "mcbf/sdr.hpp"
#include "oracles.hpp"

using namespace mcbf;
using mcbf::testing::random_channels;
using mcbf::testing::random_cvector;

namespace {

BeamformerMatrix random_w(std::size_t M, std::size_t Q, Rng& rng) {
  BeamformerMatrix w(M, Q);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t q = 0; q < Q; ++q) w(m, q) = rng.complex_normal();
  return w;
}

QpInstance random_qp(std::size_t K, std::size_t n, Rng& rng) {
  auto [A, a] = mcbf::testing::random_feasible_qp(K, n, rng);
  return make_qp(std::move(A), std::move(a));
}

double dual_objective(const QpInstance& qp, const std::vector<double>& z) {
  std::vector<double> bz(z.size());
  qp.B.multiply(z, bz);
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) s += 0.25 * z[k] * bz[k] + qp.a[k] * z[k];
  return s;
}

}  // namespace

TEST_CASE("beamformer vec layout stacks columns") {
  BeamformerMatrix w(2, 3);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t q = 0; q < 3; ++q) w(m, q) = cplx(double(m), double(q));
  const CVector v = w.vec();
  for (std::size_t q = 0; q < 3; ++q)
    for (std::size_t m = 0; m < 2; ++m) CHECK(v[q * 2 + m] == w(m, q));
  CHECK(BeamformerMatrix::from_vec(2, 3, v.view()) == w);
  CHECK(w.power() == doctest::Approx(norm_sq(v.view())));
}

TEST_CASE("eval_fk examples") {
  const ChannelSet cs = random_channels(3, 2, 3, Scenario::General, 1);
  const UserQos zero = eval_fk(BeamformerMatrix(3, 3), cs, 0);
  CHECK(zero.value == 0.0);
  CHECK(zero.active == std::vector<std::size_t>{0, 1, 2});

  const ChannelSet one = random_channels(3, 1, 1, Scenario::General, 2);
  Rng rng(3, 0);
  const BeamformerMatrix w = random_w(3, 1, rng);
  const UserQos q1 = eval_fk(w, one, 0);
  CHECK(q1.value == doctest::Approx(response(w, one, 0, 0)));
  CHECK(q1.active == std::vector<std::size_t>{0});

  // Responses (4, 4 (1 - tie/2), 1) with unit channel vectors e_1.
  const double tie = 1e-9;
  const CVector e1{{1, 0}};
  const ChannelSet unit = make_channel_set(1, 1, 3, Scenario::General, {e1, e1, e1});
  BeamformerMatrix t(1, 3);
  t(0, 0) = 2.0;
  t(0, 1) = std::sqrt(4.0 * (1 - tie / 2));
  t(0, 2) = 1.0;
  CHECK(eval_fk(t, unit, 0, tie).active == std::vector<std::size_t>{0, 1});
}

TEST_CASE("subgradient examples") {
  const ChannelSet cs = random_channels(3, 1, 2, Scenario::General, 4);
  Rng rng(5, 0);
  BeamformerMatrix w = random_w(3, 2, rng);
  const UserQos qos = eval_fk(w, cs, 0);
  REQUIRE(qos.active.size() == 1);
  const std::size_t q = qos.active[0];
  const CMatrix g = subgradient(w, cs, 0);
  const CVector& h = cs.at(0, q);
  const cplx hw = dot(h.view(), w.column(q).view());
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(std::abs(g(m, q) - 2.0 * h[m] * hw) < 1e-12);
    CHECK(g(m, 1 - q) == cplx(0, 0));
  }
  const CMatrix g0 = subgradient(BeamformerMatrix(3, 2), cs, 0);
  CHECK(g0.frobenius_norm() == 0.0);

  // Two tied channels: each column carries half of its single-channel slope.
  const CVector e{{1, 0}, {0, 1}};
  const ChannelSet tied = make_channel_set(2, 1, 2, Scenario::Homogeneous, {e, e});
  BeamformerMatrix wt(2, 2);
  wt(0, 0) = 1;
  wt(0, 1) = {0, 1};
  const CMatrix gt = subgradient(wt, tied, 0);
  for (std::size_t c = 0; c < 2; ++c) {
    const cplx r = dot(e.view(), wt.column(c).view());
    for (std::size_t m = 0; m < 2; ++m) CHECK(std::abs(gt(m, c) - 0.5 * (2.0 * e[m] * r)) < 1e-12);
  }
}

TEST_CASE("subgradient inequality on random pairs") {
  Rng rng(6, 0);
  int checked = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t M = 1 + rep % 4, Q = 1 + rep % 3;
    const ChannelSet cs = random_channels(M, 1, Q, rep % 5 ? Scenario::General : Scenario::Homogeneous,
                                          1000 + rep);
    const BeamformerMatrix W = random_w(M, Q, rng);
    const BeamformerMatrix V = random_w(M, Q, rng);
    CMatrix diff = W.matrix();
    diff -= V.matrix();
    const double lhs = eval_fk(W, cs, 0).value;
    const double rhs = eval_fk(V, cs, 0).value + inner(subgradient(V, cs, 0), diff);
    CHECK(lhs >= rhs - 1e-10);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("linearization offsets and the QP built at a feasible point") {
  const ChannelSet cs = random_channels(3, 4, 2, Scenario::General, 7);
  const BeamformerMatrix w = make_feasible_start(cs, 1);
  const Linearization lin = linearize(w, cs);
  for (std::size_t k = 0; k < cs.K; ++k) {
    CHECK_FALSE(lin.active[k].empty());
    CHECK(lin.c[k] == doctest::Approx(eval_fk(w, cs, k).value - inner(lin.G[k], w.matrix()) - 1.0));
    for (std::size_t q = 0; q < cs.Q; ++q)
      if (std::find(lin.active[k].begin(), lin.active[k].end(), q) == lin.active[k].end())
        for (std::size_t m = 0; m < cs.M; ++m) CHECK(lin.G[k](m, q) == cplx(0, 0));
  }

  const QpInstance qp = build_qp(w, cs);
  const CVector x = w.vec();
  const CVector ax = qp.A * x.view();
  for (std::size_t k = 0; k < cs.K; ++k) {
    CHECK(ax[k].real() == doctest::Approx(inner(lin.G[k], w.matrix())).epsilon(1e-12));
    // Slack of W_n in its own subproblem is f_k(W_n) - 1.
    CHECK(ax[k].real() + qp.a[k] == doctest::Approx(eval_fk(w, cs, k).value - 1.0).epsilon(1e-9));
  }
  // At least one user is tight at the scaled random start.
  double min_slack = 1e300;
  for (std::size_t k = 0; k < cs.K; ++k) min_slack = std::min(min_slack, ax[k].real() + qp.a[k]);
  CHECK(std::abs(min_slack) < 1e-9);

  for (std::size_t k = 0; k < cs.K; ++k)
    for (std::size_t j = 0; j < cs.K; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < qp.A.cols(); ++i)
        s += qp.A(k, i).real() * qp.A(j, i).real() + qp.A(k, i).imag() * qp.A(j, i).imag();
      CHECK(std::abs(qp.B(k, j) - s) <= 1e-12 * std::max(1.0, std::abs(s)));
    }
  CHECK(qp.mu > 0.0);
  CHECK(qp.mu <= 2.0 / qp.lambda1);

  BeamformerMatrix bad = w;
  bad *= 0.5;
  CHECK_THROWS_AS(build_qp(bad, cs), InvalidState);
}

TEST_CASE("single-user QP row") {
  const CVector h{{1, 0}, {0, 2}};
  const ChannelSet cs = make_channel_set(2, 1, 1, Scenario::General, {h});
  BeamformerMatrix w(2, 1);
  w(0, 0) = 1.0;
  w(1, 0) = {0, -1.0};
  // h^H w = 1 + (-2i)(-i) ... = 1 - 2 = -1, f = 1.
  REQUIRE(eval_fk(w, cs, 0).value == doctest::Approx(1.0));
  const QpInstance qp = build_qp(w, cs);
  const cplx hw = dot(h.view(), w.column(0).view());
  for (std::size_t m = 0; m < 2; ++m) CHECK(std::abs(qp.A(0, m) - std::conj(2.0 * h[m] * hw)) < 1e-14);
  CHECK(qp.a[0] == doctest::Approx(std::norm(hw) - 2.0 * std::norm(hw) - 1.0));
}

TEST_CASE("dfgp: inactive constraints give the origin") {
  Rng rng(8, 0);
  CMatrix A(3, 4);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 4; ++i) A(k, i) = rng.complex_normal();
  const QpInstance qp = make_qp(A, {0.5, 0.0, 2.0});
  const DfgpResult r = dfgp_solve(qp, 50);
  CHECK(norm(r.x.view()) == 0.0);
  for (double z : r.z) CHECK(z == 0.0);
}

TEST_CASE("dfgp: single constraint closed form") {
  Rng rng(9, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const CVector h = random_cvector(1 + rep % 6, rng);
    CMatrix A(1, h.dim());
    for (std::size_t i = 0; i < h.dim(); ++i) A(0, i) = std::conj(h[i]);
    const QpInstance qp = make_qp(A, {-1.0});
    const DfgpResult r = dfgp_solve(qp, 400);
    const double n2 = norm_sq(h.view());
    CHECK(r.z[0] == doctest::Approx(2.0 / n2).epsilon(1e-9));
    for (std::size_t i = 0; i < h.dim(); ++i) CHECK(std::abs(r.x[i] - h[i] / n2) < 1e-9);
    CHECK(norm_sq(r.x.view()) == doctest::Approx(1.0 / n2).epsilon(1e-9));
  }
}

TEST_CASE("active-set oracle rejects infeasible constraints") {
  CMatrix A(2, 1);
  A(0, 0) = 1.0;
  A(1, 0) = -1.0;
  CHECK_THROWS_AS(mcbf::testing::qp_active_set_oracle(A, {-1.0, -1.0}), InvalidInput);
  const auto ok = mcbf::testing::qp_active_set_oracle(A, {-1.0, 2.0});
  CHECK(ok.x[0].real() == doctest::Approx(1.0));
  CHECK(ok.objective == doctest::Approx(1.0));
}

TEST_CASE("dfgp: agrees with active-set enumeration") {
  Rng rng(10, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t K = 1 + rep % 4, n = 1 + rep % 6;
    const QpInstance qp = random_qp(K, n, rng);
    const auto oracle = mcbf::testing::qp_active_set_oracle(qp.A, qp.a);
    const DfgpResult r = dfgp_solve(qp, 200000, 1e-13);
    CVector d = r.x;
    for (std::size_t i = 0; i < n; ++i) d[i] -= oracle.x[i];
    CHECK(norm(d.view()) <= 1e-5 * std::max(1.0, norm(oracle.x.view())));
    // Dual optimality: complementary slackness and primal violation.
    const CVector ax = qp.A * r.x.view();
    double amax = 0.0;
    for (double v : qp.a) amax = std::max(amax, std::abs(v));
    for (std::size_t k = 0; k < K; ++k) {
      const double slack = ax[k].real() + qp.a[k];
      CHECK(std::abs(r.z[k] * slack) <= 1e-4 * (1.0 + amax));
      CHECK(slack >= -1e-5);
      CHECK(r.z[k] >= 0.0);
    }
  }
}

TEST_CASE("dfgp: dual gap decays at least quadratically") {
  // Accelerated projected gradient on an L-smooth dual with L = lambda_1 / 2:
  // D(z_l) - D* <= 2 L ||z*||^2 / (l + 1)^2. Allow a factor of 10.
  Rng rng(11, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const QpInstance qp = random_qp(4, 3, rng);
    const auto oracle = mcbf::testing::qp_active_set_oracle(qp.A, qp.a);
    const double dstar = -oracle.objective;
    const std::vector<double> zstar = dfgp_solve(qp, 200000, 1e-14).z;
    CHECK(dual_objective(qp, zstar) == doctest::Approx(dstar).epsilon(1e-8));
    double z2 = 0.0;
    for (double z : zstar) z2 += z * z;
    const double lip = 0.5 * qp.lambda1;
    for (int l : {1, 4, 16, 64, 256}) {
      const double gap = dual_objective(qp, dfgp_solve(qp, l, 0.0).z) - dstar;
      CHECK(gap >= -1e-9);
      CHECK(gap <= 10.0 * 2.0 * lip * z2 / ((l + 1.0) * (l + 1.0)) + 1e-12);
    }
  }
}

TEST_CASE("make_feasible_start") {
  const ChannelSet cs = random_channels(4, 6, 3, Scenario::General, 12);
  const BeamformerMatrix w = make_feasible_start(cs, 5);
  CHECK(min_fk(w, cs) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(make_feasible_start(cs, 5) == w);
  CHECK_FALSE(make_feasible_start(cs, 6) == w);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ChannelSet one = random_channels(4, 1, 1, Scenario::General, seed);
    const BeamformerMatrix s = make_feasible_start(one, seed);
    CHECK(s.power() >= 1.0 / norm_sq(one.at(0, 0).view()) * (1 - 1e-12));
  }
}

TEST_CASE("sca: single user converges in one step") {
  Rng rng(13, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const CVector h = random_cvector(4, rng);
    const ChannelSet cs = make_channel_set(4, 1, 1, Scenario::General, {h});
    ScaOptions opts;
    opts.seed = rep;
    const SolveReport rep1 = sca_solve(cs, std::nullopt, opts);
    const double n2 = norm_sq(h.view());
    CHECK(rep1.power == doctest::Approx(1.0 / n2).epsilon(1e-9));
    CHECK(rep1.cost_trace[1] == doctest::Approx(1.0 / n2).epsilon(1e-9));
    CHECK(rep1.converged);
    CHECK(rep1.outer_iters <= 2);
  }
}

TEST_CASE("sca: stationary start terminates immediately") {
  const CVector h{{1, 0}, {0, 1}};
  const ChannelSet cs = make_channel_set(2, 1, 1, Scenario::General, {h});
  // h = (1, i); the optimum h / ||h||^2 is already a fixed point.
  BeamformerMatrix w0(2, 1);
  w0(0, 0) = 0.5;
  w0(1, 0) = {0, 0.5};
  const SolveReport rep = sca_solve(cs, w0);
  CHECK(rep.cost_trace.size() <= 2);
  CHECK(mcbf::testing::max_abs_diff(rep.final_W.matrix(), w0.matrix()) < 1e-9);
}

TEST_CASE("sca: invariants on random instances") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Scenario s = seed % 3 ? Scenario::General : Scenario::Homogeneous;
    const ChannelSet cs = random_channels(6, 12, 3, s, seed);
    ScaOptions opts;
    opts.seed = seed;
    const SolveReport rep = sca_solve(cs, std::nullopt, opts);
    REQUIRE(rep.cost_trace.size() == rep.iterates.size());
    CHECK(rep.cost_trace.size() == static_cast<std::size_t>(rep.outer_iters) + 1);
    for (std::size_t n = 1; n < rep.cost_trace.size(); ++n)
      CHECK(rep.cost_trace[n] <= rep.cost_trace[n - 1] + 1e-9);
    for (const auto& it : rep.iterates) CHECK(it.min_margin >= 1 - 1e-8);
    CHECK(rep.power == rep.cost_trace.back());
    CHECK(min_fk(rep.final_W, cs) >= 1 - 1e-8);
    CHECK(rep.power >= sdr_solve(cs).value - 1e-5);
    CHECK(rep.inner_iters_per_outer.size() == static_cast<std::size_t>(rep.outer_iters));
    // Deterministic given the seed.
    CHECK(sca_solve(cs, std::nullopt, opts).cost_trace == rep.cost_trace);
  }
}

TEST_CASE("sca: argument validation") {
  const ChannelSet cs = random_channels(3, 3, 2, Scenario::General, 14);
  CHECK_THROWS_AS(sca_solve(cs, BeamformerMatrix(3, 1)), InvalidInput);
  CHECK_THROWS_AS(sca_solve(cs, BeamformerMatrix(3, 2)), InvalidInput);
  ScaOptions bad;
  bad.inner_iters = 0;
  CHECK_THROWS_AS(sca_solve(cs, std::nullopt, bad), InvalidInput);
  CHECK_THROWS_AS(dfgp_solve(build_qp(make_feasible_start(cs, 0), cs), 0), InvalidInput);
}

TEST_CASE("trace CSV") {
  const ChannelSet cs = random_channels(3, 4, 2, Scenario::General, 15);
  const SolveReport rep = sca_solve(cs, std::nullopt);
  std::ostringstream out;
  write_trace_csv(out, rep);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "outer_iter,cost,min_margin,step_norm");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == rep.iterates.size());
}
