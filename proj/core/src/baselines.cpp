// SPDX-License-Identifier: Apache-2.0
#include "mcbf/baselines.hpp"

#include <numeric>

#include "mcbf/error.hpp"
#include "mcbf/rng.hpp"

namespace mcbf {

namespace {

// Places a single-group solution into column q of a full M x Q matrix.
void place_column(BeamformerMatrix& w, std::size_t q, const BeamformerMatrix& group_w) {
  for (std::size_t m = 0; m < w.M(); ++m) w(m, q) = group_w(m, 0);
}

ScaOptions with_seed(ScaOptions opts, std::uint64_t seed) {
  opts.seed = seed;
  return opts;
}

}  // namespace

std::string_view to_string(BaselineScheme s) noexcept {
  return s == BaselineScheme::OneGroup ? "onegroup" : "equipartition";
}

ChannelSet single_group(const ChannelSet& cs, std::size_t q,
                        const std::vector<std::size_t>& members) {
  if (q >= cs.Q) throw InvalidInput("single_group: channel index out of range");
  ChannelSet g;
  g.M = cs.M;
  g.K = members.size();
  g.Q = 1;
  g.scenario = Scenario::General;
  g.seed = cs.seed;
  g.h.reserve(members.size());
  for (std::size_t k : members) {
    if (k >= cs.K) throw InvalidInput("single_group: user index out of range");
    g.h.push_back(cs.at(k, q));
  }
  return g;
}

BaselineResult one_group(const ChannelSet& cs, const ScaOptions& opts, std::uint64_t seed) {
  cs.validate();
  std::vector<std::size_t> everyone(cs.K);
  std::iota(everyone.begin(), everyone.end(), 0);

  BaselineResult res;
  res.scheme = BaselineScheme::OneGroup;
  res.candidate_power.resize(cs.Q);
  std::size_t best_q = 0;
  BeamformerMatrix best_w;
  for (std::size_t q = 0; q < cs.Q; ++q) {
    const SolveReport rep = sca_solve(single_group(cs, q, everyone), std::nullopt, with_seed(opts, seed));
    res.candidate_power[q] = rep.power;
    if (q == 0 || rep.power < res.candidate_power[best_q]) {
      best_q = q;
      best_w = rep.final_W;
    }
  }
  res.W = BeamformerMatrix(cs.M, cs.Q);
  place_column(res.W, best_q, best_w);
  res.per_channel_power.assign(cs.Q, 0.0);
  res.per_channel_power[best_q] = res.candidate_power[best_q];
  res.power = res.candidate_power[best_q];
  res.schedule.assign.assign(cs.K, best_q);
  res.schedule.margin.resize(cs.K);
  for (std::size_t k = 0; k < cs.K; ++k) res.schedule.margin[k] = response(res.W, cs, k, best_q);
  return res;
}

BaselineResult equipartition(const ChannelSet& cs, const ScaOptions& opts, std::uint64_t seed) {
  cs.validate();
  std::vector<std::size_t> perm(cs.K);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed, 0);
  for (std::size_t i = cs.K; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

  BaselineResult res;
  res.scheme = BaselineScheme::Equipartition;
  res.W = BeamformerMatrix(cs.M, cs.Q);
  res.per_channel_power.assign(cs.Q, 0.0);
  res.schedule.assign.assign(cs.K, 0);
  res.schedule.margin.assign(cs.K, 0.0);

  const std::size_t base = cs.K / cs.Q;
  const std::size_t extra = cs.K % cs.Q;
  std::size_t next = 0;
  for (std::size_t g = 0; g < cs.Q; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    std::vector<std::size_t> members(perm.begin() + next, perm.begin() + next + size);
    next += size;
    if (members.empty()) continue;
    const SolveReport rep =
        sca_solve(single_group(cs, g, members), std::nullopt, with_seed(opts, derive_seed(seed, 1, g)));
    place_column(res.W, g, rep.final_W);
    res.per_channel_power[g] = rep.power;
    for (std::size_t k : members) {
      res.schedule.assign[k] = g;
      res.schedule.margin[k] = response(res.W, cs, k, g);
    }
  }
  res.power = std::accumulate(res.per_channel_power.begin(), res.per_channel_power.end(), 0.0);
  return res;
}

}  // namespace mcbf
