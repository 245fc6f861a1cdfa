// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "test_util.hpp"
#include "tse/quality.hpp"
#include "tse/signal.hpp"

using namespace tse;

namespace {
constexpr int kRate = 16000;
}

TEST_CASE("classify reproduces the three-way partition at gamma 0.3") {
  CHECK(classify(1.9, 0.3) == QualityClass::High);
  CHECK(classify(1.5, 0.3) == QualityClass::Medium);
  CHECK(classify(1.1, 0.3) == QualityClass::Low);
  // Boundaries are inclusive to Medium.
  CHECK(classify(1.8, 0.3) == QualityClass::Medium);
  CHECK(classify(1.2, 0.3) == QualityClass::Medium);
}

TEST_CASE("classify rejects negative gamma") {
  CHECK_THROWS_WITH_AS(classify(2.0, -0.1), doctest::Contains("InvalidThreshold"), Error);
}

TEST_CASE("classify tiles the score axis monotonically") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<Real> score_dist(-1.0, 7.0);
  std::uniform_real_distribution<Real> gamma_dist(0.0, 2.0);
  auto rank = [](QualityClass c) {
    return c == QualityClass::Low ? 0 : (c == QualityClass::Medium ? 1 : 2);
  };
  for (int i = 0; i < 10000; ++i) {
    const Real gamma = gamma_dist(rng);
    const Real a = score_dist(rng), b = score_dist(rng);
    const Real lo = std::min(a, b), hi = std::max(a, b);
    CHECK(rank(classify(lo, gamma)) <= rank(classify(hi, gamma)));
  }
}

TEST_CASE("gamma zero collapses Medium to the single anchor point") {
  CHECK(classify(1.5, 0.0) == QualityClass::Medium);
  CHECK(classify(1.5 + 1e-9, 0.0) == QualityClass::High);
  CHECK(classify(1.5 - 1e-9, 0.0) == QualityClass::Low);
}

TEST_CASE("growing gamma only moves scores toward Medium") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<Real> score_dist(-1.0, 7.0);
  std::uniform_real_distribution<Real> gamma_dist(0.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const Real score = score_dist(rng);
    const Real g1 = gamma_dist(rng), g2 = gamma_dist(rng);
    const Real lo = std::min(g1, g2), hi = std::max(g1, g2);
    const QualityClass at_lo = classify(score, lo);
    const QualityClass at_hi = classify(score, hi);
    if (at_hi == QualityClass::High) CHECK(at_lo == QualityClass::High);
    if (at_hi == QualityClass::Low) CHECK(at_lo == QualityClass::Low);
  }
}

TEST_CASE("snr_to_score endpoints") {
  CHECK(snr_to_score(25.0) == 5.0);
  CHECK(snr_to_score(-5.0) == 1.0);
  CHECK(snr_to_score(100.0) == 5.0);
  CHECK(snr_to_score(-100.0) == 1.0);
  CHECK(snr_to_score(10.0) == doctest::Approx(3.0));
}

TEST_CASE("estimate_quality prefers the clean signal") {
  Wave clean = test::speechlike(2 * kRate, kRate, 10, 0.1);
  Wave noise = test::random_wave(2 * kRate, 11, 0.1);
  Wave noisy = clean + noise;
  const Real clean_score = estimate_quality(clean, kRate);
  const Real noisy_score = estimate_quality(noisy, kRate);
  CHECK(clean_score > noisy_score);
}

TEST_CASE("estimate_quality needs at least one second") {
  Wave w = test::random_wave(kRate / 2, 12);
  CHECK_THROWS_WITH_AS(estimate_quality(w, kRate), doctest::Contains("InputTooShort"),
                       Error);
}

TEST_CASE("route composes scorer, classify and the strategy map") {
  struct FixedScorer : QualityScorer {
    Real value;
    explicit FixedScorer(Real v) : value(v) {}
    std::string id() const override { return "fixed"; }
    Real score(const Wave&, int, const std::string&) const override { return value; }
  };
  Eigen::MatrixXd s(2, kRate);
  s.row(0) = test::random_wave(kRate, 20).transpose();
  s.row(1) = test::random_wave(kRate, 21).transpose();
  MultiChannelWave wave(s, kRate);

  RoutingDecision high = route(wave, FixedScorer(2.0), 0.3, "u1");
  CHECK(high.quality == QualityClass::High);
  CHECK(high.strategy == Strategy::GssOnly);

  RoutingDecision med = route(wave, FixedScorer(1.4), 0.3, "u2");
  CHECK(med.quality == QualityClass::Medium);
  CHECK(med.strategy == Strategy::GssFusionExtract);
  CHECK_FALSE(med.scorer_failed);
}

TEST_CASE("route via sidecar file and failure fallback") {
  const std::string path = "/tmp/tse_scores_test.json";
  {
    std::ofstream os(path);
    os << R"({"utt_low": 1.15, "utt_high": 2.4})";
  }
  SidecarScorer scorer = SidecarScorer::from_file(path);
  Eigen::MatrixXd s(1, kRate);
  s.row(0) = test::random_wave(kRate, 30).transpose();
  MultiChannelWave wave(s, kRate);

  RoutingDecision low = route(wave, scorer, 0.3, "utt_low");
  CHECK(low.quality == QualityClass::Low);
  CHECK(low.strategy == Strategy::GssDrcnet);
  CHECK(low.score == doctest::Approx(1.15));

  // Unknown id: the scorer fails, routing falls back to Medium and says so.
  RoutingDecision fallback = route(wave, scorer, 0.3, "missing");
  CHECK(fallback.scorer_failed);
  CHECK(fallback.quality == QualityClass::Medium);
  CHECK(fallback.strategy == Strategy::GssFusionExtract);
  std::remove(path.c_str());
}

TEST_CASE("route validates gamma range") {
  Eigen::MatrixXd s(1, kRate);
  s.row(0) = test::random_wave(kRate, 40).transpose();
  MultiChannelWave wave(s, kRate);
  HeuristicSnrScorer scorer;
  CHECK_THROWS_AS(route(wave, scorer, 4.5, "u"), Error);
  CHECK_THROWS_AS(route(wave, scorer, -0.1, "u"), Error);
}
