// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_TYPES_HPP_
#define TSE_TYPES_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "tse/error.hpp"

namespace tse {

using Real = double;
using Complex = std::complex<Real>;

// Mono sample buffer, dimensionless amplitudes in nominal [-1, 1].
using Wave = Eigen::VectorXd;

// T x F complex time-frequency matrix (frames by bins).
using Spectrum = Eigen::MatrixXcd;

// T x F real mask / magnitude matrix.
using RealMask = Eigen::ArrayXXd;

enum class WindowKind { SqrtHann, Hann, Rect };

struct StftConfig {
  Real window_ms = 32.0;
  Real hop_ms = 10.0;
  int fft_size = 512;
  WindowKind window = WindowKind::SqrtHann;

  int win_samples(int sample_rate) const {
    return static_cast<int>(std::lround(window_ms * sample_rate / 1000.0));
  }
  int hop_samples(int sample_rate) const {
    return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
  }
  int bins() const { return fft_size / 2 + 1; }

  void validate(int sample_rate) const {
    if (sample_rate <= 0) throw Error(ErrorCode::BadConfig, "sample_rate must be positive");
    if (hop_ms <= 0 || window_ms <= 0)
      throw Error(ErrorCode::BadConfig, "window/hop must be positive");
    if (hop_ms > window_ms)
      throw Error(ErrorCode::BadConfig, "hop must not exceed window length");
    if (fft_size < win_samples(sample_rate))
      throw Error(ErrorCode::BadConfig, "fft_size smaller than window");
  }
};

// C x N sampled audio. All channels share one length and sample rate.
struct MultiChannelWave {
  Eigen::MatrixXd samples;  // C x N
  int sample_rate = 16000;

  MultiChannelWave() = default;
  MultiChannelWave(Eigen::MatrixXd s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  static MultiChannelWave from_mono(const Wave& w, int rate) {
    MultiChannelWave out;
    out.samples = w.transpose();
    out.sample_rate = rate;
    return out;
  }

  int channels() const { return static_cast<int>(samples.rows()); }
  Eigen::Index num_samples() const { return samples.cols(); }
  Wave channel(int c) const { return samples.row(c).transpose(); }
};

// One channel's T x F spectrogram together with the geometry it was made with.
struct ComplexSpectrogram {
  Spectrum data;  // T x F
  int sample_rate = 16000;
  StftConfig cfg;

  Eigen::Index frames() const { return data.rows(); }
  Eigen::Index bins() const { return data.cols(); }
};

inline Real db_from_ratio(Real power_ratio) { return 10.0 * std::log10(power_ratio); }

inline Real rms(const Wave& x) {
  if (x.size() == 0) return 0.0;
  return std::sqrt(x.squaredNorm() / static_cast<Real>(x.size()));
}

// dBFS of an RMS amplitude; floored to keep silence finite.
inline Real rms_dbfs(const Wave& x) {
  return 20.0 * std::log10(std::max(rms(x), 1e-300));
}

}  // namespace tse

#endif  // TSE_TYPES_HPP_
