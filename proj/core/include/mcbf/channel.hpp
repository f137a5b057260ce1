// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "mcbf/linalg.hpp"

namespace mcbf {

enum class Scenario { General, Homogeneous };

std::string_view to_string(Scenario s) noexcept;
/// Accepts "general" or "homogeneous"; throws InvalidInput otherwise.
Scenario parse_scenario(std::string_view token);

/// Normalized channels h_{k,q} = h~_{k,q} / (sigma_{k,q} sqrt(gamma_q)). With
/// this scaling the QoS requirement of user k on channel q is exactly
/// |h_{k,q}^H w_q|^2 >= 1.
struct ChannelSet {
  std::size_t M = 0;  // antennas
  std::size_t K = 0;  // users
  std::size_t Q = 0;  // orthogonal channels
  Scenario scenario = Scenario::General;
  std::uint64_t seed = 0;
  std::vector<CVector> h;  // user-major: h[k * Q + q]

  const CVector& at(std::size_t k, std::size_t q) const { return h[k * Q + q]; }
  CVector& at(std::size_t k, std::size_t q) { return h[k * Q + q]; }

  /// Throws InvalidInput when dimensions, finiteness or the homogeneous
  /// replication invariant do not hold.
  void validate() const;

  friend bool operator==(const ChannelSet&, const ChannelSet&) = default;
};

/// Builds and validates a set from explicit vectors (user-major order).
ChannelSet make_channel_set(std::size_t M, std::size_t K, std::size_t Q, Scenario scenario,
                            std::vector<CVector> h, std::uint64_t seed = 0);

struct ChannelGenConfig {
  std::size_t M = 8;
  std::size_t K = 10;
  std::size_t Q = 2;
  double qos_target_db = 3.0;
  double noise_variance = 1.0;
  double shadow_sigma_db = 0.5;
  Scenario scenario = Scenario::General;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Rayleigh small-scale fading times log-normal shadowing, normalized by the
/// noise level and QoS target. Shadowing is drawn per (user, channel) in the
/// general scenario and per user in the homogeneous one. Stream layout: one
/// Rng stream per drawn vector (index k*Q + q, or k when homogeneous); each
/// stream first yields the shadowing sample, then the M entries.
ChannelSet generate(const ChannelGenConfig& cfg);

// Text format: line 1 `M,K,Q,scenario,seed`, then K*Q lines
// `k,q,re_1,im_1,...,re_M,im_M` with 1-based k and q, users outer and channels
// inner, every float printed with 17 significant digits.
void write_channels(std::ostream& out, const ChannelSet& cs);
ChannelSet read_channels(std::istream& in);
void save(const ChannelSet& cs, const std::filesystem::path& path);
ChannelSet load(const std::filesystem::path& path);

}  // namespace mcbf
