// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/gss.hpp"

#include "tse/signal.hpp"

namespace tse {

SpectrogramStack stft_stack(const MultiChannelWave& wave, const StftConfig& cfg) {
  SpectrogramStack stack;
  stack.reserve(wave.channels());
  for (int c = 0; c < wave.channels(); ++c)
    stack.push_back(stft(wave.channel(c), wave.sample_rate, cfg));
  return stack;
}

Wave gss_extract(const MultiChannelWave& wave, const ActivityGrid& activities,
                 const GssConfig& cfg) {
  if (wave.channels() < 2)
    throw Error(ErrorCode::NeedMultichannel, "guided separation needs >= 2 channels");
  if (cfg.target_class < 0 || cfg.target_class >= activities.num_classes() - 1)
    throw Error(ErrorCode::BadConfig, "target class must name a speech row");

  SpectrogramStack stack = stft_stack(wave, cfg.stft);

  EmOptions em;
  em.iterations = cfg.em_iterations;
  em.seed = cfg.seed;
  EmResult posteriors = run_em(stack, activities, em);

  const RealMask& target = posteriors.masks[cfg.target_class];
  RealMask distortion = (1.0 - target).cwiseMax(0.0).cwiseMin(1.0);

  BeamformResult beam = mvdr_beamform(stack, target, distortion, cfg.ref_channel);
  return istft(beam.spec, cfg.stft, wave.num_samples());
}

}  // namespace tse
