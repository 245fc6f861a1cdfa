// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/quality.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "tse/signal.hpp"

namespace tse {

const char* to_string(QualityClass c) {
  switch (c) {
    case QualityClass::High: return "High";
    case QualityClass::Medium: return "Medium";
    case QualityClass::Low: return "Low";
  }
  return "?";
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::GssOnly: return "GssOnly";
    case Strategy::GssFusionExtract: return "GssFusionExtract";
    case Strategy::GssDrcnet: return "GssDrcnet";
  }
  return "?";
}

QualityClass classify(Real score, Real gamma) {
  if (gamma < 0) throw Error(ErrorCode::InvalidThreshold, "gamma must be >= 0");
  if (!std::isfinite(score))
    throw Error(ErrorCode::InvalidThreshold, "score must be finite");
  if (score > 1.5 + gamma) return QualityClass::High;
  if (score < 1.5 - gamma) return QualityClass::Low;
  return QualityClass::Medium;
}

Strategy strategy_for(QualityClass quality) {
  switch (quality) {
    case QualityClass::High: return Strategy::GssOnly;
    case QualityClass::Medium: return Strategy::GssFusionExtract;
    case QualityClass::Low: return Strategy::GssDrcnet;
  }
  return Strategy::GssFusionExtract;
}

Real snr_to_score(Real snr_db) {
  return std::clamp(1.0 + 4.0 * (snr_db + 5.0) / 30.0, 1.0, 5.0);
}

Real estimate_quality(const Wave& wave, int sample_rate, const StftConfig& cfg) {
  if (wave.size() < sample_rate)
    throw Error(ErrorCode::InputTooShort, "quality estimation needs >= 1 s of audio");

  ComplexSpectrogram spec = stft(wave, sample_rate, cfg);
  const Eigen::Index frames = spec.frames();
  const Eigen::Index bins = spec.bins();
  RealMask power = spec.data.cwiseAbs2().array();

  // Time-smoothed power, width 9, then the per-band minimum as a noise floor.
  const int half = 4;
  Eigen::VectorXd floor_per_band(bins);
  for (Eigen::Index f = 0; f < bins; ++f) {
    Real best = std::numeric_limits<Real>::infinity();
    for (Eigen::Index t = 0; t < frames; ++t) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, t - half);
      const Eigen::Index hi = std::min(frames - 1, t + half);
      const Real avg = power.col(f).segment(lo, hi - lo + 1).mean();
      best = std::min(best, avg);
    }
    floor_per_band[f] = std::max(best, 1e-14);
  }
  const Real floor_total = floor_per_band.sum();

  // Frame SNRs, pooled over the more energetic half of the frames.
  std::vector<Real> frame_power(frames);
  for (Eigen::Index t = 0; t < frames; ++t) frame_power[t] = power.row(t).sum();
  std::vector<Eigen::Index> order(frames);
  for (Eigen::Index t = 0; t < frames; ++t) order[t] = t;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return frame_power[a] > frame_power[b]; });
  const Eigen::Index keep = (frames + 1) / 2;
  Real snr_sum = 0.0;
  for (Eigen::Index i = 0; i < keep; ++i) {
    const Real ratio = std::max(frame_power[order[i]] / floor_total - 1.0, 1e-3);
    snr_sum += db_from_ratio(ratio);
  }
  return snr_to_score(snr_sum / keep);
}

Real HeuristicSnrScorer::score(const Wave& wave, int sample_rate,
                               const std::string&) const {
  try {
    return estimate_quality(wave, sample_rate);
  } catch (const Error& e) {
    throw Error(ErrorCode::ScorerUnavailable, e.what());
  }
}

SidecarScorer SidecarScorer::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::BadFile, "cannot open " + path);
  nlohmann::json j;
  is >> j;
  std::map<std::string, Real> scores;
  for (auto it = j.begin(); it != j.end(); ++it) scores[it.key()] = it.value().get<Real>();
  return SidecarScorer(std::move(scores));
}

Real SidecarScorer::score(const Wave&, int, const std::string& utterance_id) const {
  auto it = scores_.find(utterance_id);
  if (it == scores_.end())
    throw Error(ErrorCode::ScorerUnavailable, "no sidecar score for " + utterance_id);
  return it->second;
}

RoutingDecision route(const MultiChannelWave& wave, const QualityScorer& scorer,
                      Real gamma, const std::string& utterance_id) {
  if (gamma < 0 || gamma > 4)
    throw Error(ErrorCode::InvalidThreshold, "gamma must lie in [0, 4]");
  RoutingDecision decision;
  decision.gamma = gamma;
  decision.scorer_id = scorer.id();
  try {
    decision.score = scorer.score(average_channels(wave), wave.sample_rate, utterance_id);
  } catch (const Error&) {
    decision.score = 1.5;  // fall back to the Medium anchor
    decision.scorer_failed = true;
  }
  decision.quality = classify(decision.score, gamma);
  decision.strategy = strategy_for(decision.quality);
  return decision;
}

}  // namespace tse
