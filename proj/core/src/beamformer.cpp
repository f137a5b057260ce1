// SPDX-License-Identifier: Apache-2.0
#include "mcbf/beamformer.hpp"

#include <algorithm>
#include <limits>

#include "mcbf/error.hpp"

namespace mcbf {

BeamformerMatrix BeamformerMatrix::from_vec(std::size_t M, std::size_t Q,
                                            std::span<const cplx> x) {
  if (x.size() != M * Q) throw InvalidInput("from_vec: length is not M*Q");
  BeamformerMatrix w(M, Q);
  for (std::size_t q = 0; q < Q; ++q)
    for (std::size_t m = 0; m < M; ++m) w(m, q) = x[q * M + m];
  return w;
}

CVector BeamformerMatrix::vec() const {
  CVector x(M() * Q());
  for (std::size_t q = 0; q < Q(); ++q)
    for (std::size_t m = 0; m < M(); ++m) x[q * M() + m] = w_(m, q);
  return x;
}

double BeamformerMatrix::power() const noexcept { return norm_sq(w_.entries()); }

void require_matching(const BeamformerMatrix& w, const ChannelSet& cs) {
  if (w.M() != cs.M || w.Q() != cs.Q)
    throw InvalidInput("beamformer shape does not match the channel set");
}

double response(const BeamformerMatrix& w, const ChannelSet& cs, std::size_t k, std::size_t q) {
  const CVector& h = cs.at(k, q);
  cplx s{0.0, 0.0};
  for (std::size_t m = 0; m < cs.M; ++m) s += std::conj(h[m]) * w(m, q);
  return std::norm(s);
}

UserQos eval_fk(const BeamformerMatrix& w, const ChannelSet& cs, std::size_t k, double tie_tol) {
  require_matching(w, cs);
  std::vector<double> r(cs.Q);
  for (std::size_t q = 0; q < cs.Q; ++q) r[q] = response(w, cs, k, q);
  UserQos out;
  out.value = *std::max_element(r.begin(), r.end());
  const double threshold = out.value * (1.0 - tie_tol);
  for (std::size_t q = 0; q < cs.Q; ++q)
    if (r[q] >= threshold) out.active.push_back(q);
  return out;
}

double min_fk(const BeamformerMatrix& w, const ChannelSet& cs) {
  require_matching(w, cs);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cs.K; ++k) {
    double best = 0.0;
    for (std::size_t q = 0; q < cs.Q; ++q) best = std::max(best, response(w, cs, k, q));
    worst = std::min(worst, best);
  }
  return worst;
}

}  // namespace mcbf
