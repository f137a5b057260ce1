// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mcbf/channel.hpp"
#include "mcbf/linalg.hpp"

namespace mcbf {

/// W = [w_1 ... w_Q], one M-antenna beamformer per channel.
class BeamformerMatrix {
 public:
  BeamformerMatrix() = default;
  BeamformerMatrix(std::size_t M, std::size_t Q) : w_(M, Q) {}
  explicit BeamformerMatrix(CMatrix w) : w_(std::move(w)) {}

  /// Inverse of vec(): x stacks the columns w_1, ..., w_Q.
  static BeamformerMatrix from_vec(std::size_t M, std::size_t Q, std::span<const cplx> x);

  std::size_t M() const noexcept { return w_.rows(); }
  std::size_t Q() const noexcept { return w_.cols(); }
  const CMatrix& matrix() const noexcept { return w_; }
  CMatrix& matrix() noexcept { return w_; }
  cplx& operator()(std::size_t m, std::size_t q) { return w_(m, q); }
  const cplx& operator()(std::size_t m, std::size_t q) const { return w_(m, q); }

  CVector column(std::size_t q) const { return w_.column(q); }
  CVector vec() const;
  /// ||W||_F^2, the total transmit power.
  double power() const noexcept;

  BeamformerMatrix& operator*=(double s) noexcept {
    w_ *= s;
    return *this;
  }

  friend bool operator==(const BeamformerMatrix&, const BeamformerMatrix&) = default;

 private:
  CMatrix w_;
};

/// |h_{k,q}^H w_q|^2
double response(const BeamformerMatrix& w, const ChannelSet& cs, std::size_t k, std::size_t q);

struct UserQos {
  double value = 0.0;               // f_k(W) = max_q |h_{k,q}^H w_q|^2
  std::vector<std::size_t> active;  // I_k(W), ascending channel indices
};

/// f_k(W) and its active channel set. A channel counts as active when its
/// response is within a relative band tie_tol of the maximum; when the maximum
/// is zero every channel is active.
UserQos eval_fk(const BeamformerMatrix& w, const ChannelSet& cs, std::size_t k,
                double tie_tol = 1e-9);

/// min_k f_k(W); the beamformers are feasible iff this is >= 1.
double min_fk(const BeamformerMatrix& w, const ChannelSet& cs);

void require_matching(const BeamformerMatrix& w, const ChannelSet& cs);

}  // namespace mcbf
