// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_BEAMFORM_HPP_
#define TSE_BEAMFORM_HPP_

#include <vector>

#include "tse/cacgmm.hpp"
#include "tse/types.hpp"

namespace tse {

struct BeamformResult {
  ComplexSpectrogram spec;
  std::vector<int> singular_bins;  // bins passed through on the reference channel
};

// Souden-form MVDR from mask-weighted spatial covariances. Bins whose
// distortion covariance stays singular after diagonal loading are reported
// and passed through on the reference channel. With one channel the filter
// degenerates to applying the target mask to the reference.
BeamformResult mvdr_beamform(const SpectrogramStack& obs, const RealMask& target_mask,
                             const RealMask& distortion_mask, int ref_channel = 0,
                             Real loading = 1e-6);

}  // namespace tse

#endif  // TSE_BEAMFORM_HPP_
