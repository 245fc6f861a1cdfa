// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_QUALITY_HPP_
#define TSE_QUALITY_HPP_

#include <map>
#include <string>

#include "tse/types.hpp"

namespace tse {

enum class QualityClass { High, Medium, Low };
enum class Strategy { GssOnly, GssFusionExtract, GssDrcnet };

const char* to_string(QualityClass c);
const char* to_string(Strategy s);

struct RoutingDecision {
  Real score = 0.0;
  Real gamma = 0.3;
  QualityClass quality = QualityClass::Medium;
  Strategy strategy = Strategy::GssFusionExtract;
  std::string scorer_id;
  bool scorer_failed = false;
};

// Three-way split around the 1.5 anchor: High above 1.5+gamma, Low below
// 1.5-gamma, Medium otherwise. Boundary scores are Medium.
QualityClass classify(Real score, Real gamma);

// Fixed class -> strategy map.
Strategy strategy_for(QualityClass quality);

// clamp(1 + 4*(snr_db + 5)/30, 1, 5)
Real snr_to_score(Real snr_db);

// Non-intrusive 1..5 quality proxy: per-band minima tracking estimates the
// noise floor, frame SNRs above it are pooled over the more energetic half
// of the frames, then mapped through snr_to_score. Needs >= 1 s of audio.
Real estimate_quality(const Wave& wave, int sample_rate,
                      const StftConfig& cfg = StftConfig{});

class QualityScorer {
 public:
  virtual ~QualityScorer() = default;
  virtual std::string id() const = 0;
  // Throws Error(ScorerUnavailable) when no score can be produced.
  virtual Real score(const Wave& wave, int sample_rate,
                     const std::string& utterance_id) const = 0;
};

class HeuristicSnrScorer : public QualityScorer {
 public:
  std::string id() const override { return "heuristic"; }
  Real score(const Wave& wave, int sample_rate,
             const std::string& utterance_id) const override;
};

// Reads externally computed scores from a {"utterance_id": score} JSON map.
class SidecarScorer : public QualityScorer {
 public:
  explicit SidecarScorer(std::map<std::string, Real> scores)
      : scores_(std::move(scores)) {}
  static SidecarScorer from_file(const std::string& path);

  std::string id() const override { return "sidecar"; }
  Real score(const Wave& wave, int sample_rate,
             const std::string& utterance_id) const override;

 private:
  std::map<std::string, Real> scores_;
};

// Scores the plain channel average and picks a strategy. A scorer failure
// falls back to Medium and is flagged on the decision.
RoutingDecision route(const MultiChannelWave& wave, const QualityScorer& scorer,
                      Real gamma, const std::string& utterance_id);

}  // namespace tse

#endif  // TSE_QUALITY_HPP_
