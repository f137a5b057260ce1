// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random numbers. Every stream is addressed by (seed, stream)
// and is independent of how many values other streams have consumed, so
// parallel Monte-Carlo trials reproduce bit-for-bit regardless of scheduling.
#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace mcbf {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// One SplitMix64 step: the generator output for state x. Bijective.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derived seed for a (cell, realization) pair of an experiment.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept;

/// Stream of variates keyed by the 64-bit seed. The 128-bit Philox counter is
/// split into (block index: low 64 bits, stream index: high 64 bits).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  /// Standard normal via Box-Muller (both outputs used).
  double normal() noexcept;
  /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
  std::complex<double> complex_normal() noexcept;
  /// Uniform integer in [0, n) without modulo bias; n >= 1.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;  // remaining 64-bit words in buffer_ (0, 1 or 2)
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mcbf
