// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/cacgmm.hpp"

#include <cmath>
#include <random>

namespace tse {

namespace {

constexpr Real kNormEps = 1e-12;
constexpr Real kQuadFloor = 1e-12;

struct NormalizedObs {
  std::vector<Eigen::MatrixXcd> z;              // [f], C x T unit-norm columns
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;  // T x F
  int channels = 0;
  Eigen::Index frames = 0;
  Eigen::Index bins = 0;
};

NormalizedObs normalize_observations(const SpectrogramStack& obs) {
  NormalizedObs out;
  out.channels = static_cast<int>(obs.size());
  if (out.channels < 2)
    throw Error(ErrorCode::NeedMultichannel, "CACGMM needs at least two channels");
  out.frames = obs[0].frames();
  out.bins = obs[0].bins();
  for (const auto& s : obs)
    if (s.frames() != out.frames || s.bins() != out.bins)
      throw Error(ErrorCode::ShapeError, "channel spectrograms disagree in shape");

  out.z.resize(out.bins);
  out.valid.resize(out.frames, out.bins);
  Eigen::VectorXcd y(out.channels);
  for (Eigen::Index f = 0; f < out.bins; ++f) {
    out.z[f].resize(out.channels, out.frames);
    for (Eigen::Index t = 0; t < out.frames; ++t) {
      for (int c = 0; c < out.channels; ++c) y[c] = obs[c].data(t, f);
      const Real norm = y.norm();
      if (norm < kNormEps) {
        out.valid(t, f) = false;
        out.z[f].col(t).setZero();
      } else {
        out.valid(t, f) = true;
        out.z[f].col(t) = y / norm;
      }
    }
  }
  return out;
}

// log of the angular density up to the z-independent normalizer:
// log p(z; B) = const(C) - logdet(B) - C * log(z^H B^{-1} z)
Real log_density_const(int channels) {
  return std::lgamma(static_cast<Real>(channels)) - std::log(2.0) -
         channels * std::log(M_PI);
}

// Speech classes start at identity plus a small seeded Hermitian perturbation
// (breaks exact ties between classes with identical activity). The noise
// class is modelled as spatially white: exactly identity, and the M step
// leaves it untouched.
CacgmmState init_state(int num_classes, int noise_class, Eigen::Index bins, int channels,
                       uint64_t seed) {
  CacgmmState state;
  state.weights =
      Eigen::MatrixXd::Constant(num_classes, bins, 1.0 / static_cast<Real>(num_classes));
  state.shape.resize(bins);
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> dist(0.0, 1e-5);
  for (Eigen::Index f = 0; f < bins; ++f) {
    state.shape[f].resize(num_classes);
    for (int k = 0; k < num_classes; ++k) {
      if (k == noise_class) {
        state.shape[f][k] = Eigen::MatrixXcd::Identity(channels, channels);
        continue;
      }
      Eigen::MatrixXcd noise(channels, channels);
      for (int i = 0; i < channels; ++i)
        for (int j = 0; j < channels; ++j)
          noise(i, j) = Complex(dist(rng), dist(rng));
      Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(channels, channels) +
                           0.5 * (noise + noise.adjoint());
      b *= static_cast<Real>(channels) / b.trace().real();
      state.shape[f][k] = b;
    }
  }
  return state;
}

void regularize_shape(Eigen::MatrixXcd& b, Real loading) {
  const int c = static_cast<int>(b.rows());
  const Real tr = b.trace().real();
  b += loading * tr * Eigen::MatrixXcd::Identity(c, c);
  b *= static_cast<Real>(c) / b.trace().real();
}

}  // namespace

EmResult run_em(const SpectrogramStack& obs, const ActivityGrid& activities,
                const EmOptions& opts) {
  if (opts.iterations < 1)
    throw Error(ErrorCode::BadConfig, "iterations must be >= 1");
  activities.validate();
  NormalizedObs data = normalize_observations(obs);
  if (activities.frames() != data.frames)
    throw Error(ErrorCode::ShapeError, "activity frame count does not match spectrogram");

  const int num_classes = activities.num_classes();
  const int noise_class = activities.noise_class();
  const int channels = data.channels;
  const Eigen::Index frames = data.frames;
  const Eigen::Index bins = data.bins;
  const Real logc = log_density_const(channels);

  CacgmmState state = init_state(num_classes, noise_class, bins, channels, opts.seed);

  EmResult result;
  result.masks.assign(num_classes, RealMask::Zero(frames, bins));
  result.log_likelihood.resize(opts.iterations + 1);

  std::vector<Eigen::MatrixXcd> inv(num_classes);
  Eigen::VectorXd logdet(num_classes);
  Eigen::VectorXd logw(num_classes), gamma(num_classes), quad(num_classes);

  // One E pass; when `accumulate` is set the sufficient statistics feed an
  // M update, otherwise only masks/likelihood are produced.
  auto e_step = [&](bool accumulate) -> Real {
    Real total_ll = 0.0;
    std::vector<Eigen::MatrixXcd> num(num_classes);
    Eigen::VectorXd den(num_classes), wsum(num_classes);
    for (Eigen::Index f = 0; f < bins; ++f) {
      for (int k = 0; k < num_classes; ++k) {
        Eigen::MatrixXcd b = state.shape[f][k];
        Eigen::LLT<Eigen::MatrixXcd> llt(b);
        if (llt.info() != Eigen::Success) {
          regularize_shape(b, 1e-3);
          llt.compute(b);
        }
        inv[k] = llt.solve(Eigen::MatrixXcd::Identity(channels, channels));
        Real ld = 0.0;
        for (int i = 0; i < channels; ++i) ld += std::log(llt.matrixL()(i, i).real());
        logdet[k] = 2.0 * ld;
        if (accumulate) {
          num[k].setZero(channels, channels);
        }
      }
      den.setZero();
      wsum.setZero();

      for (Eigen::Index t = 0; t < frames; ++t) {
        int active = 0;
        for (int k = 0; k < num_classes; ++k) active += activities.is_active(k, t);
        if (!data.valid(t, f)) {
          for (int k = 0; k < num_classes; ++k)
            result.masks[k](t, f) =
                activities.is_active(k, t) ? 1.0 / active : 0.0;
          continue;
        }
        const auto z = data.z[f].col(t);
        Real max_logw = -std::numeric_limits<Real>::infinity();
        for (int k = 0; k < num_classes; ++k) {
          if (!activities.is_active(k, t)) continue;
          quad[k] = std::max(kQuadFloor, (z.adjoint() * inv[k] * z).real().value());
          logw[k] = std::log(state.weights(k, f)) + logc - logdet[k] -
                    channels * std::log(quad[k]);
          max_logw = std::max(max_logw, logw[k]);
        }
        Real lse = 0.0;
        for (int k = 0; k < num_classes; ++k)
          if (activities.is_active(k, t)) lse += std::exp(logw[k] - max_logw);
        const Real log_marginal = max_logw + std::log(lse);
        total_ll += log_marginal;

        for (int k = 0; k < num_classes; ++k) {
          if (!activities.is_active(k, t)) {
            result.masks[k](t, f) = 0.0;
            continue;
          }
          gamma[k] = std::exp(logw[k] - log_marginal);
          result.masks[k](t, f) = gamma[k];
          if (accumulate) {
            num[k].noalias() += (gamma[k] / quad[k]) * (z * z.adjoint());
            den[k] += gamma[k];
            wsum[k] += gamma[k];
          }
        }
      }

      if (accumulate) {
        const Real wtotal = wsum.sum();
        for (int k = 0; k < num_classes; ++k) {
          if (k != noise_class && den[k] > 1e-12) {
            state.shape[f][k] = num[k] * (static_cast<Real>(channels) / den[k]);
            regularize_shape(state.shape[f][k], opts.shape_loading);
          }
          state.weights(k, f) =
              wtotal > 0 ? std::max(wsum[k] / wtotal, opts.weight_floor) : 1.0 / num_classes;
        }
        state.weights.col(f) /= state.weights.col(f).sum();
      }
    }
    return total_ll;
  };

  for (int it = 0; it < opts.iterations; ++it)
    result.log_likelihood[it] = e_step(/*accumulate=*/true);
  result.log_likelihood[opts.iterations] = e_step(/*accumulate=*/false);

  result.state = state;
  return result;
}

Real cacgmm_log_likelihood(const SpectrogramStack& obs, const ActivityGrid& activities,
                           const CacgmmState& state) {
  NormalizedObs data = normalize_observations(obs);
  const int num_classes = activities.num_classes();
  const int channels = data.channels;
  const Real logc = log_density_const(channels);
  Real total = 0.0;
  for (Eigen::Index f = 0; f < data.bins; ++f) {
    std::vector<Eigen::MatrixXcd> inv(num_classes);
    Eigen::VectorXd logdet(num_classes);
    for (int k = 0; k < num_classes; ++k) {
      Eigen::LLT<Eigen::MatrixXcd> llt(state.shape[f][k]);
      inv[k] = llt.solve(Eigen::MatrixXcd::Identity(channels, channels));
      Real ld = 0.0;
      for (int i = 0; i < channels; ++i) ld += std::log(llt.matrixL()(i, i).real());
      logdet[k] = 2.0 * ld;
    }
    for (Eigen::Index t = 0; t < data.frames; ++t) {
      if (!data.valid(t, f)) continue;
      const auto z = data.z[f].col(t);
      Real acc = 0.0;
      Real max_term = -std::numeric_limits<Real>::infinity();
      std::vector<Real> terms;
      for (int k = 0; k < num_classes; ++k) {
        if (!activities.is_active(k, t)) continue;
        const Real quad =
            std::max(kQuadFloor, (z.adjoint() * inv[k] * z).real().value());
        const Real term = std::log(state.weights(k, f)) + logc - logdet[k] -
                          channels * std::log(quad);
        terms.push_back(term);
        max_term = std::max(max_term, term);
      }
      for (Real term : terms) acc += std::exp(term - max_term);
      total += max_term + std::log(acc);
    }
  }
  return total;
}

}  // namespace tse
