// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_DRCNET_HPP_
#define TSE_DRCNET_HPP_

#include <memory>
#include <vector>

#include "tse/nn/layers.hpp"
#include "tse/types.hpp"

namespace tse {

// Four gated-conv encoder blocks, a recurrent bottleneck, four transposed
// decoder blocks with U-Net skips, and a tanh-bounded two-channel complex
// ratio mask head. channels[0] is the (real, imag) input width.
struct DrcNetSpec {
  std::vector<int> channels{2, 32, 32, 64};
  int kt = 1, kf = 5;
  int st = 1, sf = 2;
  Eigen::Index bins = 257;  // input F; every encoder stage needs an odd input

  nlohmann::json to_json() const;
  static DrcNetSpec from_json(const nlohmann::json& j);
};

class DrcNet {
 public:
  DrcNet(nn::ParamStore& store, const DrcNetSpec& spec);

  // Complex ratio mask with both components in (-1, 1).
  Spectrum forward(const nn::ParamStore& params, const Spectrum& input);
  // dcrm holds dL/d(re) + i*dL/d(im) of the mask entries.
  void backward(const nn::ParamStore& params, const Spectrum& dcrm,
                nn::ParamStore& grads);

  const DrcNetSpec& spec() const { return spec_; }
  nlohmann::json arch() const { return spec_.to_json(); }

 private:
  struct EncBlock {
    std::unique_ptr<nn::GatedConv2d> conv;
    std::unique_ptr<nn::CumulativeLayerNorm> norm;
    std::unique_ptr<nn::PRelu> act;
  };
  struct DecBlock {
    std::unique_ptr<nn::TransposedGatedConv2d> conv;
    std::unique_ptr<nn::CumulativeLayerNorm> norm;
    std::unique_ptr<nn::PRelu> act;
  };

  DrcNetSpec spec_;
  std::vector<EncBlock> enc_;
  std::unique_ptr<nn::ElmanBottleneck> bottleneck_;
  std::vector<DecBlock> dec_;
  std::unique_ptr<nn::Conv2d> head_;

  std::vector<nn::FeatureMap> enc_out_;
  nn::FeatureMap crm_raw_;  // tanh output, cached for backward
  bool have_forward_ = false;
};

// alpha * ||est - target||_2 (complex L2) + (1 - alpha) * || |est| - |target| ||_2.
Real loss_eq1(const Spectrum& est, const Spectrum& target, Real alpha = 0.5);

// Gradient w.r.t. est, encoded as dL/d(re) + i*dL/d(im) per entry.
Spectrum loss_eq1_backward(const Spectrum& est, const Spectrum& target,
                           Real alpha = 0.5);

// stft -> mask -> apply -> istft over a single-channel wave.
Wave drcnet_enhance(const Wave& input, int sample_rate, DrcNet& net,
                    const nn::ParamStore& params, const StftConfig& cfg);

}  // namespace tse

#endif  // TSE_DRCNET_HPP_
