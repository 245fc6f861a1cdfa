// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_CACGMM_HPP_
#define TSE_CACGMM_HPP_

#include <vector>

#include "tse/activity.hpp"
#include "tse/types.hpp"

namespace tse {

// One spectrogram per microphone channel, identical geometry.
using SpectrogramStack = std::vector<ComplexSpectrogram>;

// Per-frequency mixture of complex angular central Gaussians.
struct CacgmmState {
  Eigen::MatrixXd weights;                         // K x F, rows of the simplex per f
  std::vector<std::vector<Eigen::MatrixXcd>> shape;  // [f][k], C x C Hermitian, trace C

  int num_classes() const { return static_cast<int>(weights.rows()); }
  int num_bins() const { return static_cast<int>(weights.cols()); }
};

struct EmOptions {
  int iterations = 20;
  uint64_t seed = 0;
  Real shape_loading = 1e-6;   // diagonal loading relative to trace before inversion
  Real weight_floor = 1e-12;
};

struct EmResult {
  std::vector<RealMask> masks;        // K entries, each T x F class posterior
  CacgmmState state;
  Eigen::VectorXd log_likelihood;     // per iteration, plus one entry for the final pass
};

// Activity-gated EM over unit-norm spatial vectors. Class posteriors are
// exactly zero wherever the class is inactive; per-bin posteriors sum to one.
// Frames whose spatial vector has negligible norm fall back to an
// activity-uniform posterior.
EmResult run_em(const SpectrogramStack& obs, const ActivityGrid& activities,
                const EmOptions& opts = {});

// Total data log-likelihood of the observations under a fitted state,
// using the same unit-norm convention as run_em.
Real cacgmm_log_likelihood(const SpectrogramStack& obs, const ActivityGrid& activities,
                           const CacgmmState& state);

}  // namespace tse

#endif  // TSE_CACGMM_HPP_
