// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/nn/layers.hpp"

#include <cmath>

namespace tse::nn {

namespace {

// Patch matrix: (in_ch*kt*kf) x (T'*F'), column q = t_out * F' + f_out.
Eigen::MatrixXd im2col(const FeatureMap& x, const ConvGeom& geom) {
  const Eigen::Index frames = x.frames(), bins = x.bins();
  const Eigen::Index t_out = geom.out_frames(frames);
  const Eigen::Index f_out = geom.out_bins(bins);
  const Eigen::Index pl = geom.freq_pad_left(bins);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(geom.patch(), t_out * f_out);
  for (int ic = 0; ic < geom.in_ch; ++ic) {
    const RealMask& src = x.ch[ic];
    for (int dt = 0; dt < geom.kt; ++dt) {
      for (int df = 0; df < geom.kf; ++df) {
        const Eigen::Index row = (static_cast<Eigen::Index>(ic) * geom.kt + dt) * geom.kf + df;
        for (Eigen::Index to = 0; to < t_out; ++to) {
          const Eigen::Index ti = to * geom.st - (geom.kt - 1) + dt;
          if (ti < 0 || ti >= frames) continue;
          for (Eigen::Index fo = 0; fo < f_out; ++fo) {
            const Eigen::Index fi = fo * geom.sf - pl + df;
            if (fi < 0 || fi >= bins) continue;
            p(row, to * f_out + fo) = src(ti, fi);
          }
        }
      }
    }
  }
  return p;
}

FeatureMap unpack(const Eigen::MatrixXd& y, int channels, Eigen::Index frames,
                  Eigen::Index bins) {
  FeatureMap out = FeatureMap::zeros(channels, frames, bins);
  for (int c = 0; c < channels; ++c)
    for (Eigen::Index t = 0; t < frames; ++t)
      for (Eigen::Index f = 0; f < bins; ++f) out.ch[c](t, f) = y(c, t * bins + f);
  return out;
}

Eigen::MatrixXd pack(const FeatureMap& x) {
  Eigen::MatrixXd out(x.channels(), x.frames() * x.bins());
  for (int c = 0; c < x.channels(); ++c)
    for (Eigen::Index t = 0; t < x.frames(); ++t)
      for (Eigen::Index f = 0; f < x.bins(); ++f) out(c, t * x.bins() + f) = x.ch[c](t, f);
  return out;
}

inline Real conv_init_scale(const ConvGeom& geom) {
  return std::sqrt(1.0 / geom.patch());
}

}  // namespace

FeatureMap conv_apply(const Eigen::MatrixXd& w, const Eigen::VectorXd& bias,
                      const FeatureMap& x, const ConvGeom& geom) {
  if (x.channels() != geom.in_ch)
    throw Error(ErrorCode::ShapeError, "conv input channel mismatch");
  const Eigen::Index t_out = geom.out_frames(x.frames());
  const Eigen::Index f_out = geom.out_bins(x.bins());
  Eigen::MatrixXd y = w * im2col(x, geom);
  y.colwise() += bias;
  return unpack(y, geom.out_ch, t_out, f_out);
}

FeatureMap conv_adjoint(const Eigen::MatrixXd& w, const FeatureMap& y,
                        const ConvGeom& geom, Eigen::Index in_frames,
                        Eigen::Index in_bins) {
  if (y.channels() != geom.out_ch)
    throw Error(ErrorCode::ShapeError, "conv adjoint channel mismatch");
  const Eigen::Index t_out = geom.out_frames(in_frames);
  const Eigen::Index f_out = geom.out_bins(in_bins);
  if (y.frames() != t_out || y.bins() != f_out)
    throw Error(ErrorCode::ShapeError, "conv adjoint geometry mismatch");
  const Eigen::Index pl = geom.freq_pad_left(in_bins);
  const Eigen::MatrixXd d = w.transpose() * pack(y);  // patch x (T'*F')
  FeatureMap out = FeatureMap::zeros(geom.in_ch, in_frames, in_bins);
  for (int ic = 0; ic < geom.in_ch; ++ic) {
    RealMask& dst = out.ch[ic];
    for (int dt = 0; dt < geom.kt; ++dt) {
      for (int df = 0; df < geom.kf; ++df) {
        const Eigen::Index row = (static_cast<Eigen::Index>(ic) * geom.kt + dt) * geom.kf + df;
        for (Eigen::Index to = 0; to < t_out; ++to) {
          const Eigen::Index ti = to * geom.st - (geom.kt - 1) + dt;
          if (ti < 0 || ti >= in_frames) continue;
          for (Eigen::Index fo = 0; fo < f_out; ++fo) {
            const Eigen::Index fi = fo * geom.sf - pl + df;
            if (fi < 0 || fi >= in_bins) continue;
            dst(ti, fi) += d(row, to * f_out + fo);
          }
        }
      }
    }
  }
  return out;
}

void conv_weight_grad(const FeatureMap& upstream, const FeatureMap& input,
                      const ConvGeom& geom, Eigen::MatrixXd& dw) {
  dw.noalias() += pack(upstream) * im2col(input, geom).transpose();
}

Eigen::VectorXd channel_sums(const FeatureMap& x) {
  Eigen::VectorXd s(x.channels());
  for (int c = 0; c < x.channels(); ++c) s[c] = x.ch[c].sum();
  return s;
}

// ---------------------------------------------------------------------------
// GatedConv2d

GatedConv2d::GatedConv2d(ParamStore& store, const std::string& prefix,
                         const ConvGeom& geom)
    : geom_(geom) {
  const Real scale = conv_init_scale(geom);
  wa_ = store.add_uniform(prefix + ".wa", geom.out_ch, geom.patch(), scale);
  ba_ = store.add_constant(prefix + ".ba", geom.out_ch, 1, 0.0);
  wb_ = store.add_uniform(prefix + ".wb", geom.out_ch, geom.patch(), scale);
  bb_ = store.add_constant(prefix + ".bb", geom.out_ch, 1, 0.0);
}

FeatureMap GatedConv2d::forward(const ParamStore& params, const FeatureMap& x) {
  x_ = x;
  lin_ = conv_apply(params.value(wa_), params.value(ba_).col(0), x, geom_);
  FeatureMap pre = conv_apply(params.value(wb_), params.value(bb_).col(0), x, geom_);
  gate_ = sigmoid(pre);
  have_forward_ = true;
  FeatureMap y = lin_;
  for (int c = 0; c < y.channels(); ++c) y.ch[c] *= gate_.ch[c];
  return y;
}

FeatureMap GatedConv2d::backward(const ParamStore& params, const FeatureMap& gy,
                                 ParamStore& grads) {
  if (!have_forward_) throw Error(ErrorCode::GradError, "backward before forward");
  gy.require_shape(geom_.out_ch, lin_.frames(), lin_.bins());

  FeatureMap da = gy, dpre = gy;
  for (int c = 0; c < gy.channels(); ++c) {
    da.ch[c] = gy.ch[c] * gate_.ch[c];
    dpre.ch[c] = gy.ch[c] * lin_.ch[c] * gate_.ch[c] * (1.0 - gate_.ch[c]);
  }
  conv_weight_grad(da, x_, geom_, grads.value(wa_));
  grads.value(ba_).col(0) += channel_sums(da);
  conv_weight_grad(dpre, x_, geom_, grads.value(wb_));
  grads.value(bb_).col(0) += channel_sums(dpre);

  FeatureMap dx = conv_adjoint(params.value(wa_), da, geom_, x_.frames(), x_.bins());
  FeatureMap dxb = conv_adjoint(params.value(wb_), dpre, geom_, x_.frames(), x_.bins());
  for (int c = 0; c < dx.channels(); ++c) dx.ch[c] += dxb.ch[c];
  return dx;
}

// ---------------------------------------------------------------------------
// TransposedGatedConv2d

TransposedGatedConv2d::TransposedGatedConv2d(ParamStore& store,
                                             const std::string& prefix, int in_ch,
                                             int out_ch, int kt, int kf, int st, int sf)
    : in_ch_(in_ch), out_ch_(out_ch) {
  down_.in_ch = out_ch;  // the downsampling orientation runs output -> input
  down_.out_ch = in_ch;
  down_.kt = kt;
  down_.kf = kf;
  down_.st = st;
  down_.sf = sf;
  const Real scale = std::sqrt(1.0 / (static_cast<Real>(in_ch) * kt * kf));
  wa_ = store.add_uniform(prefix + ".wa", in_ch, down_.patch(), scale);
  ba_ = store.add_constant(prefix + ".ba", out_ch, 1, 0.0);
  wb_ = store.add_uniform(prefix + ".wb", in_ch, down_.patch(), scale);
  bb_ = store.add_constant(prefix + ".bb", out_ch, 1, 0.0);
}

FeatureMap TransposedGatedConv2d::forward(const ParamStore& params, const FeatureMap& x) {
  if (x.channels() != in_ch_)
    throw Error(ErrorCode::ShapeError, "transposed conv input channel mismatch");
  x_ = x;
  out_frames_ = (x.frames() - 1) * down_.st + 1;
  out_bins_count_ = (x.bins() - 1) * down_.sf + 1;

  lin_ = conv_adjoint(params.value(wa_), x, down_, out_frames_, out_bins_count_);
  FeatureMap pre = conv_adjoint(params.value(wb_), x, down_, out_frames_, out_bins_count_);
  const Eigen::VectorXd& ba = params.value(ba_).col(0);
  const Eigen::VectorXd& bb = params.value(bb_).col(0);
  for (int c = 0; c < out_ch_; ++c) {
    lin_.ch[c] += ba[c];
    pre.ch[c] += bb[c];
  }
  gate_ = sigmoid(pre);
  have_forward_ = true;
  FeatureMap y = lin_;
  for (int c = 0; c < out_ch_; ++c) y.ch[c] *= gate_.ch[c];
  return y;
}

FeatureMap TransposedGatedConv2d::backward(const ParamStore& params, const FeatureMap& gy,
                                           ParamStore& grads) {
  if (!have_forward_) throw Error(ErrorCode::GradError, "backward before forward");
  gy.require_shape(out_ch_, out_frames_, out_bins_count_);

  FeatureMap da = gy, dpre = gy;
  for (int c = 0; c < out_ch_; ++c) {
    da.ch[c] = gy.ch[c] * gate_.ch[c];
    dpre.ch[c] = gy.ch[c] * lin_.ch[c] * gate_.ch[c] * (1.0 - gate_.ch[c]);
  }
  grads.value(ba_).col(0) += channel_sums(da);
  grads.value(bb_).col(0) += channel_sums(dpre);
  // In the adjoint pairing the layer input plays the downsampled role.
  conv_weight_grad(x_, da, down_, grads.value(wa_));
  conv_weight_grad(x_, dpre, down_, grads.value(wb_));

  FeatureMap dx = conv_apply(params.value(wa_), Eigen::VectorXd::Zero(in_ch_), da, down_);
  FeatureMap dxb = conv_apply(params.value(wb_), Eigen::VectorXd::Zero(in_ch_), dpre, down_);
  for (int c = 0; c < in_ch_; ++c) dx.ch[c] += dxb.ch[c];
  return dx;
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(ParamStore& store, const std::string& prefix, const ConvGeom& geom)
    : geom_(geom) {
  w_ = store.add_uniform(prefix + ".w", geom.out_ch, geom.patch(), conv_init_scale(geom));
  b_ = store.add_constant(prefix + ".b", geom.out_ch, 1, 0.0);
}

FeatureMap Conv2d::forward(const ParamStore& params, const FeatureMap& x) {
  x_ = x;
  have_forward_ = true;
  return conv_apply(params.value(w_), params.value(b_).col(0), x, geom_);
}

FeatureMap Conv2d::backward(const ParamStore& params, const FeatureMap& gy,
                            ParamStore& grads) {
  if (!have_forward_) throw Error(ErrorCode::GradError, "backward before forward");
  conv_weight_grad(gy, x_, geom_, grads.value(w_));
  grads.value(b_).col(0) += channel_sums(gy);
  return conv_adjoint(params.value(w_), gy, geom_, x_.frames(), x_.bins());
}

// ---------------------------------------------------------------------------
// CumulativeLayerNorm

CumulativeLayerNorm::CumulativeLayerNorm(ParamStore& store, const std::string& prefix,
                                         int channels)
    : channels_(channels) {
  gain_ = store.add_constant(prefix + ".gain", channels, 1, 1.0);
  bias_ = store.add_constant(prefix + ".bias", channels, 1, 0.0);
}

FeatureMap CumulativeLayerNorm::forward(const ParamStore& params, const FeatureMap& x) {
  if (x.channels() != channels_)
    throw Error(ErrorCode::ShapeError, "cLN channel mismatch");
  const Eigen::Index frames = x.frames(), bins = x.bins();
  x_ = x;
  mu_.resize(frames);
  sd_.resize(frames);
  n_.resize(frames);

  Real s1 = 0.0, s2 = 0.0;
  const Real per_frame = static_cast<Real>(channels_) * bins;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int c = 0; c < channels_; ++c) {
      s1 += x.ch[c].row(t).sum();
      s2 += x.ch[c].row(t).square().sum();
    }
    n_[t] = per_frame * (t + 1);
    mu_[t] = s1 / n_[t];
    const Real var = std::max(0.0, s2 / n_[t] - mu_[t] * mu_[t]);
    sd_[t] = std::sqrt(var + kEps);
  }

  const Eigen::VectorXd& gain = params.value(gain_).col(0);
  const Eigen::VectorXd& bias = params.value(bias_).col(0);
  FeatureMap y = FeatureMap::zeros(channels_, frames, bins);
  for (int c = 0; c < channels_; ++c)
    for (Eigen::Index t = 0; t < frames; ++t)
      y.ch[c].row(t) = gain[c] * (x.ch[c].row(t) - mu_[t]) / sd_[t] + bias[c];
  have_forward_ = true;
  return y;
}

FeatureMap CumulativeLayerNorm::backward(const ParamStore& params, const FeatureMap& gy,
                                         ParamStore& grads) {
  if (!have_forward_) throw Error(ErrorCode::GradError, "backward before forward");
  const Eigen::Index frames = x_.frames(), bins = x_.bins();
  gy.require_shape(channels_, frames, bins);
  const Eigen::VectorXd& gain = params.value(gain_).col(0);

  // u = gy * gain_c / sd_t; per-frame sums U_t and V_t feed suffix sums
  // that capture how frame tau influences every later frame's statistics.
  FeatureMap u = FeatureMap::zeros(channels_, frames, bins);
  Eigen::VectorXd u_sum = Eigen::VectorXd::Zero(frames);
  Eigen::VectorXd v_sum = Eigen::VectorXd::Zero(frames);
  for (int c = 0; c < channels_; ++c) {
    for (Eigen::Index t = 0; t < frames; ++t) {
      u.ch[c].row(t) = gy.ch[c].row(t) * gain[c] / sd_[t];
      u_sum[t] += u.ch[c].row(t).sum();
      v_sum[t] += (u.ch[c].row(t) * (x_.ch[c].row(t) - mu_[t])).sum();
    }
  }
  Eigen::VectorXd su(frames), sv(frames), smv(frames);
  Real acc_u = 0.0, acc_v = 0.0, acc_mv = 0.0;
  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    acc_u += u_sum[t] / n_[t];
    acc_v += v_sum[t] / (n_[t] * sd_[t] * sd_[t]);
    acc_mv += mu_[t] * v_sum[t] / (n_[t] * sd_[t] * sd_[t]);
    su[t] = acc_u;
    sv[t] = acc_v;
    smv[t] = acc_mv;
  }

  FeatureMap dx = FeatureMap::zeros(channels_, frames, bins);
  for (int c = 0; c < channels_; ++c)
    for (Eigen::Index t = 0; t < frames; ++t)
      dx.ch[c].row(t) = u.ch[c].row(t) - su[t] - x_.ch[c].row(t) * sv[t] + smv[t];

  Eigen::VectorXd dgain = Eigen::VectorXd::Zero(channels_);
  Eigen::VectorXd dbias = Eigen::VectorXd::Zero(channels_);
  for (int c = 0; c < channels_; ++c) {
    for (Eigen::Index t = 0; t < frames; ++t) {
      dgain[c] += (gy.ch[c].row(t) * (x_.ch[c].row(t) - mu_[t]) / sd_[t]).sum();
      dbias[c] += gy.ch[c].row(t).sum();
    }
  }
  grads.value(gain_).col(0) += dgain;
  grads.value(bias_).col(0) += dbias;
  return dx;
}

// ---------------------------------------------------------------------------
// PRelu

PRelu::PRelu(ParamStore& store, const std::string& prefix, int channels, Real init_slope)
    : channels_(channels) {
  slope_ = store.add_constant(prefix + ".slope", channels, 1, init_slope);
}

FeatureMap PRelu::forward(const ParamStore& params, const FeatureMap& x) {
  if (x.channels() != channels_)
    throw Error(ErrorCode::ShapeError, "PReLU channel mismatch");
  x_ = x;
  have_forward_ = true;
  const Eigen::VectorXd& slope = params.value(slope_).col(0);
  FeatureMap y = x;
  for (int c = 0; c < channels_; ++c)
    y.ch[c] = (x.ch[c] > 0.0).select(x.ch[c], slope[c] * x.ch[c]);
  return y;
}

FeatureMap PRelu::backward(const ParamStore& params, const FeatureMap& gy,
                           ParamStore& grads) {
  if (!have_forward_) throw Error(ErrorCode::GradError, "backward before forward");
  gy.require_shape(channels_, x_.frames(), x_.bins());
  const Eigen::VectorXd& slope = params.value(slope_).col(0);
  FeatureMap dx = gy;
  Eigen::VectorXd dslope = Eigen::VectorXd::Zero(channels_);
  for (int c = 0; c < channels_; ++c) {
    dx.ch[c] = (x_.ch[c] > 0.0).select(gy.ch[c], slope[c] * gy.ch[c]);
    dslope[c] = ((x_.ch[c] > 0.0).select(RealMask::Zero(x_.frames(), x_.bins()),
                                         gy.ch[c] * x_.ch[c]))
                    .sum();
  }
  grads.value(slope_).col(0) += dslope;
  return dx;
}

// ---------------------------------------------------------------------------
// ElmanBottleneck

ElmanBottleneck::ElmanBottleneck(ParamStore& store, const std::string& prefix,
                                 int channels, Eigen::Index bins, int hidden)
    : channels_(channels), bins_(bins), hidden_(hidden) {
  const Eigen::Index flat = channels * bins;
  wx_ = store.add_uniform(prefix + ".wx", hidden, flat, std::sqrt(1.0 / flat));
  wh_ = store.add_uniform(prefix + ".wh", hidden, hidden, std::sqrt(1.0 / hidden));
  b_ = store.add_constant(prefix + ".b", hidden, 1, 0.0);
  wo_ = store.add_uniform(prefix + ".wo", flat, hidden, std::sqrt(1.0 / hidden));
  bo_ = store.add_constant(prefix + ".bo", flat, 1, 0.0);
}

FeatureMap ElmanBottleneck::forward(const ParamStore& params, const FeatureMap& x) {
  if (x.channels() != channels_ || x.bins() != bins_)
    throw Error(ErrorCode::ShapeError, "bottleneck shape mismatch");
  const Eigen::Index frames = x.frames();
  const Eigen::Index flat = channels_ * bins_;
  xflat_.resize(flat, frames);
  for (int c = 0; c < channels_; ++c)
    for (Eigen::Index t = 0; t < frames; ++t)
      xflat_.col(t).segment(c * bins_, bins_) = x.ch[c].row(t).matrix().transpose();

  const Eigen::MatrixXd& wx = params.value(wx_);
  const Eigen::MatrixXd& wh = params.value(wh_);
  const Eigen::VectorXd& b = params.value(b_).col(0);
  const Eigen::MatrixXd& wo = params.value(wo_);
  const Eigen::VectorXd& bo = params.value(bo_).col(0);

  h_.resize(hidden_, frames);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(hidden_);
  for (Eigen::Index t = 0; t < frames; ++t) {
    h_.col(t) = ((wx * xflat_.col(t) + wh * prev + b).array().tanh()).matrix();
    prev = h_.col(t);
  }

  Eigen::MatrixXd out = xflat_ + (wo * h_);  // residual
  out.colwise() += bo;
  FeatureMap y = FeatureMap::zeros(channels_, frames, bins_);
  for (int c = 0; c < channels_; ++c)
    for (Eigen::Index t = 0; t < frames; ++t)
      y.ch[c].row(t) = out.col(t).segment(c * bins_, bins_).transpose().array();
  have_forward_ = true;
  return y;
}

FeatureMap ElmanBottleneck::backward(const ParamStore& params, const FeatureMap& gy,
                                     ParamStore& grads) {
  if (!have_forward_) throw Error(ErrorCode::GradError, "backward before forward");
  const Eigen::Index frames = xflat_.cols();
  gy.require_shape(channels_, frames, bins_);
  const Eigen::Index flat = channels_ * bins_;

  Eigen::MatrixXd gout(flat, frames);
  for (int c = 0; c < channels_; ++c)
    for (Eigen::Index t = 0; t < frames; ++t)
      gout.col(t).segment(c * bins_, bins_) = gy.ch[c].row(t).matrix().transpose();

  const Eigen::MatrixXd& wx = params.value(wx_);
  const Eigen::MatrixXd& wh = params.value(wh_);
  const Eigen::MatrixXd& wo = params.value(wo_);

  Eigen::MatrixXd dxflat = gout;  // residual path
  grads.value(wo_).noalias() += gout * h_.transpose();
  grads.value(bo_).col(0) += gout.rowwise().sum();

  Eigen::MatrixXd dh = wo.transpose() * gout;
  Eigen::VectorXd carry = Eigen::VectorXd::Zero(hidden_);
  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    const Eigen::VectorXd dtotal = dh.col(t) + carry;
    const Eigen::VectorXd dpre =
        (dtotal.array() * (1.0 - h_.col(t).array().square())).matrix();
    grads.value(wx_).noalias() += dpre * xflat_.col(t).transpose();
    if (t > 0) grads.value(wh_).noalias() += dpre * h_.col(t - 1).transpose();
    grads.value(b_).col(0) += dpre;
    dxflat.col(t).noalias() += wx.transpose() * dpre;
    carry = wh.transpose() * dpre;
  }

  FeatureMap dx = FeatureMap::zeros(channels_, frames, bins_);
  for (int c = 0; c < channels_; ++c)
    for (Eigen::Index t = 0; t < frames; ++t)
      dx.ch[c].row(t) = dxflat.col(t).segment(c * bins_, bins_).transpose().array();
  return dx;
}

// ---------------------------------------------------------------------------

FeatureMap sigmoid(const FeatureMap& x) {
  FeatureMap y = x;
  for (auto& m : y.ch) m = 1.0 / (1.0 + (-m).exp());
  return y;
}

FeatureMap tanh_map(const FeatureMap& x) {
  FeatureMap y = x;
  for (auto& m : y.ch) m = m.tanh();
  return y;
}

}  // namespace tse::nn
