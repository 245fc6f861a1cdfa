// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_NN_LAYERS_HPP_
#define TSE_NN_LAYERS_HPP_

#include <string>
#include <vector>

#include "tse/nn/params.hpp"
#include "tse/types.hpp"

namespace tse::nn {

// Ch x T x F activation tensor, stored as one T x F array per channel.
struct FeatureMap {
  std::vector<RealMask> ch;

  FeatureMap() = default;
  static FeatureMap zeros(int channels, Eigen::Index frames, Eigen::Index bins) {
    FeatureMap fm;
    fm.ch.assign(channels, RealMask::Zero(frames, bins));
    return fm;
  }

  int channels() const { return static_cast<int>(ch.size()); }
  Eigen::Index frames() const { return ch.empty() ? 0 : ch[0].rows(); }
  Eigen::Index bins() const { return ch.empty() ? 0 : ch[0].cols(); }

  void require_shape(int channels_, Eigen::Index frames_, Eigen::Index bins_) const {
    if (channels() != channels_ || frames() != frames_ || bins() != bins_)
      throw Error(ErrorCode::ShapeError, "feature map shape mismatch");
  }
};

// Geometry of a strided 2-D convolution in its downsampling orientation.
// Time axis is causally zero-padded with kt-1 leading frames; the frequency
// axis is zero-padded so that F' = ceil(F / sf).
struct ConvGeom {
  int in_ch = 1, out_ch = 1;
  int kt = 1, kf = 1;
  int st = 1, sf = 1;

  Eigen::Index out_frames(Eigen::Index frames) const { return (frames - 1) / st + 1; }
  Eigen::Index out_bins(Eigen::Index bins) const { return (bins - 1) / sf + 1; }
  Eigen::Index freq_pad_left(Eigen::Index bins) const {
    const Eigen::Index total = (out_bins(bins) - 1) * sf + kf - bins;
    return std::max<Eigen::Index>(0, total / 2);
  }
  int patch() const { return in_ch * kt * kf; }
};

// Core linear maps shared by forward convolutions, transposed convolutions
// and both backward passes. W is (out_ch, in_ch*kt*kf) with patch entries
// ordered channel-major, then time tap, then frequency tap.
FeatureMap conv_apply(const Eigen::MatrixXd& w, const Eigen::VectorXd& bias,
                      const FeatureMap& x, const ConvGeom& geom);
FeatureMap conv_adjoint(const Eigen::MatrixXd& w, const FeatureMap& y,
                        const ConvGeom& geom, Eigen::Index in_frames,
                        Eigen::Index in_bins);
void conv_weight_grad(const FeatureMap& upstream, const FeatureMap& input,
                      const ConvGeom& geom, Eigen::MatrixXd& dw);

// Per-channel sum over all (t, f); the bias gradient of a convolution.
Eigen::VectorXd channel_sums(const FeatureMap& x);

// y = conv_a(x) .* sigmoid(conv_b(x)); two independent weight sets.
class GatedConv2d {
 public:
  GatedConv2d(ParamStore& store, const std::string& prefix, const ConvGeom& geom);

  FeatureMap forward(const ParamStore& params, const FeatureMap& x);
  FeatureMap backward(const ParamStore& params, const FeatureMap& gy, ParamStore& grads);

  const ConvGeom& geom() const { return geom_; }

 private:
  ConvGeom geom_;
  int wa_, ba_, wb_, bb_;
  FeatureMap x_, lin_, gate_;
  bool have_forward_ = false;
};

// Upsampling mirror of GatedConv2d: its forward is the adjoint of a
// downsampling conv, so F grows as (F - 1) * sf + 1 and time stays causal.
class TransposedGatedConv2d {
 public:
  TransposedGatedConv2d(ParamStore& store, const std::string& prefix, int in_ch,
                        int out_ch, int kt, int kf, int st, int sf);

  FeatureMap forward(const ParamStore& params, const FeatureMap& x);
  FeatureMap backward(const ParamStore& params, const FeatureMap& gy, ParamStore& grads);

  Eigen::Index out_bins(Eigen::Index in_bins) const {
    return (in_bins - 1) * down_.sf + 1;
  }

 private:
  ConvGeom down_;  // maps the layer's output space to its input space
  int in_ch_, out_ch_;
  int wa_, ba_, wb_, bb_;
  FeatureMap x_, lin_, gate_;
  Eigen::Index out_frames_ = 0, out_bins_count_ = 0;
  bool have_forward_ = false;
};

// Plain (ungated) convolution; used for 1x1 heads.
class Conv2d {
 public:
  Conv2d(ParamStore& store, const std::string& prefix, const ConvGeom& geom);

  FeatureMap forward(const ParamStore& params, const FeatureMap& x);
  FeatureMap backward(const ParamStore& params, const FeatureMap& gy, ParamStore& grads);

 private:
  ConvGeom geom_;
  int w_, b_;
  FeatureMap x_;
  bool have_forward_ = false;
};

// Cumulative layer normalization: frame t is normalized by the mean and
// variance accumulated over frames 0..t across all channels and bins, then
// scaled/shifted per channel.
class CumulativeLayerNorm {
 public:
  CumulativeLayerNorm(ParamStore& store, const std::string& prefix, int channels);

  FeatureMap forward(const ParamStore& params, const FeatureMap& x);
  FeatureMap backward(const ParamStore& params, const FeatureMap& gy, ParamStore& grads);

  static constexpr Real kEps = 1e-8;

 private:
  int channels_;
  int gain_, bias_;
  FeatureMap x_;
  Eigen::VectorXd mu_, sd_, n_;
  bool have_forward_ = false;
};

class PRelu {
 public:
  PRelu(ParamStore& store, const std::string& prefix, int channels,
        Real init_slope = 0.25);

  FeatureMap forward(const ParamStore& params, const FeatureMap& x);
  FeatureMap backward(const ParamStore& params, const FeatureMap& gy, ParamStore& grads);

 private:
  int channels_;
  int slope_;
  FeatureMap x_;
  bool have_forward_ = false;
};

// Single recurrent pass over frames on the flattened Ch*F feature, with a
// residual connection back to the input shape.
class ElmanBottleneck {
 public:
  ElmanBottleneck(ParamStore& store, const std::string& prefix, int channels,
                  Eigen::Index bins, int hidden);

  FeatureMap forward(const ParamStore& params, const FeatureMap& x);
  FeatureMap backward(const ParamStore& params, const FeatureMap& gy, ParamStore& grads);

 private:
  int channels_;
  Eigen::Index bins_;
  int hidden_;
  int wx_, wh_, b_, wo_, bo_;
  Eigen::MatrixXd xflat_, h_;  // D x T, H x T
  bool have_forward_ = false;
};

// Elementwise heads.
FeatureMap sigmoid(const FeatureMap& x);
FeatureMap tanh_map(const FeatureMap& x);

}  // namespace tse::nn

#endif  // TSE_NN_LAYERS_HPP_
