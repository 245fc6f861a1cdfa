// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_SIGNAL_HPP_
#define TSE_SIGNAL_HPP_

#include <optional>
#include <vector>

#include "tse/types.hpp"

namespace tse {

// Analysis window of the given kind, periodic flavour.
Eigen::VectorXd make_window(WindowKind kind, int length);

// Frames the input with half-window reflect padding at both ends, so
// T = 1 + floor(N / hop) for the default geometry. Requires N >= window.
ComplexSpectrogram stft(const Wave& x, int sample_rate, const StftConfig& cfg);

// Weighted overlap-add inverse with per-sample window-sum normalization.
// Output length defaults to (T - 1) * hop; pass `length` to trim or
// zero-extend to an exact sample count (typically the original N).
Wave istft(const ComplexSpectrogram& spec, const StftConfig& cfg,
           std::optional<Eigen::Index> length = std::nullopt);

struct LoudnessResult {
  MultiChannelWave wave;
  std::vector<bool> silent;  // per channel; silent channels are left unscaled
};

// Scales each channel so its RMS level in dBFS equals target_db.
// Channels with RMS below 1e-8 are passed through and flagged.
LoudnessResult loudness_normalize(const MultiChannelWave& wave, Real target_db = -25.0);

// Samplewise arithmetic mean across channels.
Wave average_channels(const MultiChannelWave& wave);

// Elementwise complex ratio mask: out = mask .* spec.
ComplexSpectrogram apply_crm(const ComplexSpectrogram& spec, const Spectrum& mask);

template <typename DerivedS, typename DerivedM>
Spectrum apply_crm(const Eigen::MatrixBase<DerivedS>& spec,
                   const Eigen::MatrixBase<DerivedM>& mask) {
  if (spec.rows() != mask.rows() || spec.cols() != mask.cols())
    throw Error(ErrorCode::ShapeError, "mask shape does not match spectrogram");
  return spec.cwiseProduct(mask);
}

// Scale-invariant SDR in dB, capped at +60. Signals are mean-removed first.
Real si_sdr(const Wave& estimate, const Wave& reference);

}  // namespace tse

#endif  // TSE_SIGNAL_HPP_
