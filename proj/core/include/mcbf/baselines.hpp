// SPDX-License-Identifier: Apache-2.0
//
// Reference schedulers. Both fix the user-to-channel assignment up front and
// solve independent single-group multicast problems with sca_solve.
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mcbf/channel.hpp"
#include "mcbf/sca.hpp"
#include "mcbf/sdr.hpp"

namespace mcbf {

enum class BaselineScheme { OneGroup, Equipartition };

std::string_view to_string(BaselineScheme s) noexcept;

struct BaselineResult {
  BaselineScheme scheme = BaselineScheme::OneGroup;
  double power = 0.0;
  Schedule schedule;
  std::vector<double> per_channel_power;  // Q entries, sums to power
  BeamformerMatrix W;                     // M x Q, zero columns for idle channels
  /// OneGroup only: single-group power on every candidate channel.
  std::vector<double> candidate_power;
};

/// Channel set of one multicast group: users `members` on channel q.
ChannelSet single_group(const ChannelSet& cs, std::size_t q, const std::vector<std::size_t>& members);

/// All users on one channel. Every channel is tried with the same start seed
/// and the cheapest one is kept.
BaselineResult one_group(const ChannelSet& cs, const ScaOptions& opts, std::uint64_t seed);

/// Users shuffled by Rng(seed, 0) and cut into Q groups whose sizes differ by
/// at most one (larger groups first); group g is served on channel g with the
/// single-group start seed derive_seed(seed, 1, g).
BaselineResult equipartition(const ChannelSet& cs, const ScaOptions& opts, std::uint64_t seed);

}  // namespace mcbf
