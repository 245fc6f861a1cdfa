// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/beamform.hpp"

namespace tse {

namespace {

void check_mask(const RealMask& m, Eigen::Index frames, Eigen::Index bins) {
  if (m.rows() != frames || m.cols() != bins)
    throw Error(ErrorCode::ShapeError, "mask shape does not match spectrogram");
  if (m.minCoeff() < -1e-9 || m.maxCoeff() > 1.0 + 1e-9)
    throw Error(ErrorCode::ShapeError, "mask values must lie in [0, 1]");
}

}  // namespace

BeamformResult mvdr_beamform(const SpectrogramStack& obs, const RealMask& target_mask,
                             const RealMask& distortion_mask, int ref_channel,
                             Real loading) {
  if (obs.empty()) throw Error(ErrorCode::ShapeError, "empty spectrogram stack");
  const int channels = static_cast<int>(obs.size());
  const Eigen::Index frames = obs[0].frames();
  const Eigen::Index bins = obs[0].bins();
  for (const auto& s : obs)
    if (s.frames() != frames || s.bins() != bins)
      throw Error(ErrorCode::ShapeError, "channel spectrograms disagree in shape");
  if (ref_channel < 0 || ref_channel >= channels)
    throw Error(ErrorCode::BadConfig, "reference channel out of range");
  check_mask(target_mask, frames, bins);
  check_mask(distortion_mask, frames, bins);

  BeamformResult result;
  result.spec.sample_rate = obs[0].sample_rate;
  result.spec.cfg = obs[0].cfg;
  result.spec.data.resize(frames, bins);

  if (channels == 1) {
    result.spec.data = obs[0].data.cwiseProduct(
        target_mask.matrix().cast<Complex>());
    return result;
  }

  Eigen::MatrixXcd y(channels, frames);
  Eigen::MatrixXcd phi_t(channels, channels), phi_n(channels, channels);
  for (Eigen::Index f = 0; f < bins; ++f) {
    for (Eigen::Index t = 0; t < frames; ++t)
      for (int c = 0; c < channels; ++c) y(c, t) = obs[c].data(t, f);

    phi_t.setZero();
    phi_n.setZero();
    Real t_sum = 0.0, n_sum = 0.0;
    for (Eigen::Index t = 0; t < frames; ++t) {
      const auto v = y.col(t);
      const Real mt = target_mask(t, f);
      const Real mn = distortion_mask(t, f);
      if (mt > 0) phi_t.noalias() += mt * (v * v.adjoint());
      if (mn > 0) phi_n.noalias() += mn * (v * v.adjoint());
      t_sum += mt;
      n_sum += mn;
    }
    if (t_sum > 1e-12) phi_t /= t_sum;
    if (n_sum > 1e-12) phi_n /= n_sum;

    const Real n_trace = phi_n.trace().real();
    if (n_trace <= 1e-18) {
      result.singular_bins.push_back(static_cast<int>(f));
      for (Eigen::Index t = 0; t < frames; ++t)
        result.spec.data(t, f) = obs[ref_channel].data(t, f);
      continue;
    }
    phi_n += loading * n_trace * Eigen::MatrixXcd::Identity(channels, channels);

    Eigen::LLT<Eigen::MatrixXcd> llt(phi_n);
    if (llt.info() != Eigen::Success) {
      result.singular_bins.push_back(static_cast<int>(f));
      for (Eigen::Index t = 0; t < frames; ++t)
        result.spec.data(t, f) = obs[ref_channel].data(t, f);
      continue;
    }
    const Eigen::MatrixXcd ratio = llt.solve(phi_t);  // phi_n^{-1} phi_t
    const Real lambda = ratio.trace().real();
    if (std::abs(lambda) < 1e-12) {
      // No target energy at this bin; emit silence rather than noise.
      result.spec.data.col(f).setZero();
      continue;
    }
    const Eigen::VectorXcd w = ratio.col(ref_channel) / lambda;
    result.spec.data.col(f) = (w.adjoint() * y).transpose();
  }
  return result;
}

}  // namespace tse
