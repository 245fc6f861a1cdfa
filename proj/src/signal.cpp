// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/signal.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

namespace tse {

namespace {

// Reflect index into [0, n) without repeating the edge sample.
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  if (i < 0) i = -i;
  if (i >= n) i = 2 * n - 2 - i;
  return i;
}

}  // namespace

Eigen::VectorXd make_window(WindowKind kind, int length) {
  Eigen::VectorXd w(length);
  const Real two_pi = 2.0 * M_PI;
  for (int i = 0; i < length; ++i) {
    const Real hann = 0.5 - 0.5 * std::cos(two_pi * i / length);  // periodic
    switch (kind) {
      case WindowKind::SqrtHann: w[i] = std::sqrt(hann); break;
      case WindowKind::Hann: w[i] = hann; break;
      case WindowKind::Rect: w[i] = 1.0; break;
    }
  }
  return w;
}

ComplexSpectrogram stft(const Wave& x, int sample_rate, const StftConfig& cfg) {
  cfg.validate(sample_rate);
  const Eigen::Index n = x.size();
  const int win = cfg.win_samples(sample_rate);
  const int hop = cfg.hop_samples(sample_rate);
  if (n < win)
    throw Error(ErrorCode::InputTooShort, "need at least one analysis window of samples");

  const Eigen::Index pad = win / 2;
  const Eigen::Index n_padded = n + 2 * pad;
  const Eigen::Index frames = 1 + (n_padded - win) / hop;
  const int bins = cfg.bins();

  Eigen::VectorXd padded(n_padded);
  for (Eigen::Index i = 0; i < n_padded; ++i)
    padded[i] = x[reflect_index(i - pad, n)];

  const Eigen::VectorXd window = make_window(cfg.window, win);

  ComplexSpectrogram out;
  out.sample_rate = sample_rate;
  out.cfg = cfg;
  out.data.resize(frames, bins);

  Eigen::FFT<Real> fft;
  fft.SetFlag(Eigen::FFT<Real>::HalfSpectrum);
  std::vector<Real> frame(cfg.fft_size, 0.0);
  std::vector<Complex> spec(bins);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const Eigen::Index start = t * hop;
    for (int i = 0; i < win; ++i) frame[i] = window[i] * padded[start + i];
    std::fill(frame.begin() + win, frame.end(), 0.0);
    fft.fwd(spec, frame);
    for (int f = 0; f < bins; ++f) out.data(t, f) = spec[f];
  }
  return out;
}

Wave istft(const ComplexSpectrogram& spec, const StftConfig& cfg,
           std::optional<Eigen::Index> length) {
  cfg.validate(spec.sample_rate);
  const int win = cfg.win_samples(spec.sample_rate);
  const int hop = cfg.hop_samples(spec.sample_rate);
  const int bins = cfg.bins();
  if (spec.data.cols() != bins)
    throw Error(ErrorCode::ShapeError, "spectrogram bin count does not match config");
  if (spec.cfg.fft_size != cfg.fft_size ||
      spec.cfg.win_samples(spec.sample_rate) != win ||
      spec.cfg.hop_samples(spec.sample_rate) != hop)
    throw Error(ErrorCode::ShapeError, "spectrogram geometry does not match config");

  const Eigen::Index frames = spec.data.rows();
  const Eigen::Index pad = win / 2;
  const Eigen::Index n_padded = (frames - 1) * hop + win;

  const Eigen::VectorXd window = make_window(cfg.window, win);
  Eigen::VectorXd num = Eigen::VectorXd::Zero(n_padded);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(n_padded);

  Eigen::FFT<Real> fft;
  fft.SetFlag(Eigen::FFT<Real>::HalfSpectrum);
  std::vector<Complex> row(bins);
  std::vector<Real> frame(cfg.fft_size);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int f = 0; f < bins; ++f) row[f] = spec.data(t, f);
    fft.inv(frame, row, cfg.fft_size);
    const Eigen::Index start = t * hop;
    for (int i = 0; i < win; ++i) {
      num[start + i] += window[i] * frame[i];
      den[start + i] += window[i] * window[i];
    }
  }

  const Eigen::Index out_len = length.value_or((frames - 1) * hop);
  Wave out = Wave::Zero(out_len);
  for (Eigen::Index i = 0; i < out_len; ++i) {
    const Eigen::Index p = i + pad;
    if (p < n_padded && den[p] > 1e-12) out[i] = num[p] / den[p];
  }
  return out;
}

LoudnessResult loudness_normalize(const MultiChannelWave& wave, Real target_db) {
  LoudnessResult res;
  res.wave = wave;
  res.silent.assign(wave.channels(), false);
  const Real target_rms = std::pow(10.0, target_db / 20.0);
  for (int c = 0; c < wave.channels(); ++c) {
    const Real level = rms(wave.samples.row(c).transpose());
    if (level < 1e-8) {
      res.silent[c] = true;
      continue;
    }
    res.wave.samples.row(c) *= target_rms / level;
  }
  return res;
}

Wave average_channels(const MultiChannelWave& wave) {
  if (wave.channels() < 1)
    throw Error(ErrorCode::ShapeError, "wave has no channels");
  return wave.samples.colwise().mean().transpose();
}

ComplexSpectrogram apply_crm(const ComplexSpectrogram& spec, const Spectrum& mask) {
  ComplexSpectrogram out = spec;
  out.data = apply_crm(spec.data, mask);
  return out;
}

Real si_sdr(const Wave& estimate, const Wave& reference) {
  if (estimate.size() != reference.size())
    throw Error(ErrorCode::ShapeError, "estimate and reference lengths differ");
  const Eigen::Index n = reference.size();
  if (n == 0) throw Error(ErrorCode::MetricUndefined, "empty signals");

  Wave est = estimate.array() - estimate.mean();
  Wave ref = reference.array() - reference.mean();
  const Real ref_energy = ref.squaredNorm();
  if (ref_energy < 1e-24)
    throw Error(ErrorCode::MetricUndefined, "silent reference");

  const Real alpha = est.dot(ref) / ref_energy;
  const Wave target = alpha * ref;
  const Real target_energy = target.squaredNorm();
  const Real residual_energy = (est - target).squaredNorm();
  if (residual_energy <= target_energy * 1e-12) return 60.0;
  return std::min(60.0, db_from_ratio(target_energy / residual_energy));
}

}  // namespace tse
