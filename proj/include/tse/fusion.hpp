// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_FUSION_HPP_
#define TSE_FUSION_HPP_

#include <array>
#include <optional>
#include <string>

#include "tse/nn/layers.hpp"
#include "tse/types.hpp"

namespace tse {

// The medium-quality front end's input bundle: the 6-channel far-field
// recording plus a single-channel pre-separated companion of equal length.
struct FusionInput {
  MultiChannelWave farfield;
  Wave gss_out;
  StftConfig stft;

  void validate() const;
};

struct AssembledFeatures {
  nn::FeatureMap mags;          // 8 x T x F magnitude features
  std::array<bool, 8> silent{};  // loudness flags per feature channel
};

// Feature stack in fixed order [ff1..ff6, average(ff), gss_out]; the average
// is formed from the raw channels, then every channel is individually
// normalized to -25 dBFS before the STFT.
AssembledFeatures assemble_channels(const FusionInput& input);

// Frequency-downsampling mask head: gated conv (2,3)/(1,2) -> cLN -> PReLU
// -> transposed gated conv back to full resolution -> sigmoid.
class FdNet {
 public:
  FdNet(nn::ParamStore& store, int in_ch = 8, int width = 32);

  RealMask forward(const nn::ParamStore& params, const nn::FeatureMap& features);
  // Gradient of a scalar loss w.r.t. the mask, propagated to all parameters.
  nn::FeatureMap backward(const nn::ParamStore& params, const RealMask& dmask,
                          nn::ParamStore& grads);

  int in_channels() const { return in_ch_; }
  nlohmann::json arch() const;

 private:
  int in_ch_, width_;
  nn::GatedConv2d enc_;
  nn::CumulativeLayerNorm cln_;
  nn::PRelu act_;
  nn::TransposedGatedConv2d dec_;
  RealMask mask_;
  bool have_forward_ = false;
};

// Downstream extraction stage plug point. The default passes the fused wave
// through; richer extractors may consume an optional per-utterance visual
// cue matrix (frames x dims), which is forwarded untouched.
class TargetExtractor {
 public:
  virtual ~TargetExtractor() = default;
  virtual Wave extract(const Wave& fused, int sample_rate,
                       const std::optional<Eigen::MatrixXd>& visual_cues) const = 0;
};

class IdentityExtractor : public TargetExtractor {
 public:
  Wave extract(const Wave& fused, int, const std::optional<Eigen::MatrixXd>&) const override {
    return fused;
  }
};

// Shape-prefixed binary matrix: int64 rows, int64 cols, row-major doubles.
Eigen::MatrixXd read_embedding(const std::string& path);
void write_embedding(const std::string& path, const Eigen::MatrixXd& m);

// Full medium-quality path: features -> mask -> masked average magnitude
// (average phase kept) -> time domain -> extractor plug point.
Wave fusion_extract(const FusionInput& input, FdNet& net, const nn::ParamStore& params,
                    const TargetExtractor& extractor = IdentityExtractor{},
                    const std::optional<Eigen::MatrixXd>& visual_cues = std::nullopt);

}  // namespace tse

#endif  // TSE_FUSION_HPP_
