// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_GSS_HPP_
#define TSE_GSS_HPP_

#include "tse/activity.hpp"
#include "tse/beamform.hpp"
#include "tse/cacgmm.hpp"
#include "tse/types.hpp"

namespace tse {

struct GssConfig {
  StftConfig stft;
  int em_iterations = 20;
  int target_class = 0;   // row of the ActivityGrid to extract
  int ref_channel = 0;
  uint64_t seed = 0;
};

SpectrogramStack stft_stack(const MultiChannelWave& wave, const StftConfig& cfg);

// Activity-guided separation: per-frequency mixture EM for masks, then a
// Souden MVDR toward the target class, back to the time domain.
Wave gss_extract(const MultiChannelWave& wave, const ActivityGrid& activities,
                 const GssConfig& cfg);

}  // namespace tse

#endif  // TSE_GSS_HPP_
