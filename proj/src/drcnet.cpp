// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/drcnet.hpp"

#include "tse/signal.hpp"

namespace tse {

namespace {

nn::FeatureMap concat_channels(const nn::FeatureMap& a, const nn::FeatureMap& b) {
  if (a.frames() != b.frames() || a.bins() != b.bins())
    throw Error(ErrorCode::ShapeError, "skip connection shape mismatch");
  nn::FeatureMap out;
  out.ch = a.ch;
  out.ch.insert(out.ch.end(), b.ch.begin(), b.ch.end());
  return out;
}

nn::FeatureMap stack_complex(const Spectrum& s) {
  nn::FeatureMap fm = nn::FeatureMap::zeros(2, s.rows(), s.cols());
  fm.ch[0] = s.real().array();
  fm.ch[1] = s.imag().array();
  return fm;
}

}  // namespace

nlohmann::json DrcNetSpec::to_json() const {
  return {{"kind", "drc_crm"}, {"channels", channels}, {"kernel", {kt, kf}},
          {"stride", {st, sf}}, {"bins", bins}};
}

DrcNetSpec DrcNetSpec::from_json(const nlohmann::json& j) {
  DrcNetSpec spec;
  spec.channels = j.at("channels").get<std::vector<int>>();
  spec.kt = j.at("kernel")[0].get<int>();
  spec.kf = j.at("kernel")[1].get<int>();
  spec.st = j.at("stride")[0].get<int>();
  spec.sf = j.at("stride")[1].get<int>();
  spec.bins = j.at("bins").get<Eigen::Index>();
  return spec;
}

DrcNet::DrcNet(nn::ParamStore& store, const DrcNetSpec& spec) : spec_(spec) {
  if (spec.channels.size() != 4)
    throw Error(ErrorCode::BadConfig, "expected 4 channel dims");
  if (spec.channels[0] != 2)
    throw Error(ErrorCode::BadConfig, "input width must be 2 (real, imag)");

  // Encoder widths [c1, c2, c3, c3]; each stage halves an odd bin count so
  // the transposed decoder can restore it exactly.
  const int c1 = spec.channels[1], c2 = spec.channels[2], c3 = spec.channels[3];
  const int enc_in[4] = {2, c1, c2, c3};
  const int enc_out[4] = {c1, c2, c3, c3};
  Eigen::Index bins = spec.bins;
  std::vector<Eigen::Index> bins_chain;
  for (int i = 0; i < 4; ++i) {
    if (bins % 2 != 1)
      throw Error(ErrorCode::ShapeError,
                  "encoder stage " + std::to_string(i + 1) + " needs an odd bin count, got " +
                      std::to_string(bins));
    EncBlock block;
    block.conv = std::make_unique<nn::GatedConv2d>(
        store, "drc.enc" + std::to_string(i + 1),
        nn::ConvGeom{.in_ch = enc_in[i], .out_ch = enc_out[i], .kt = spec.kt,
                     .kf = spec.kf, .st = spec.st, .sf = spec.sf});
    block.norm = std::make_unique<nn::CumulativeLayerNorm>(
        store, "drc.encn" + std::to_string(i + 1), enc_out[i]);
    block.act =
        std::make_unique<nn::PRelu>(store, "drc.enca" + std::to_string(i + 1), enc_out[i]);
    enc_.push_back(std::move(block));
    bins = (bins - 1) / 2 + 1;
    bins_chain.push_back(bins);
  }

  bottleneck_ = std::make_unique<nn::ElmanBottleneck>(store, "drc.rnn", c3, bins, c3);

  const int dec_in[4] = {c3 + c3, c3 + c3, c2 + c2, c1 + c1};
  const int dec_out[4] = {c3, c2, c1, c1};
  for (int i = 0; i < 4; ++i) {
    DecBlock block;
    block.conv = std::make_unique<nn::TransposedGatedConv2d>(
        store, "drc.dec" + std::to_string(i + 1), dec_in[i], dec_out[i], spec.kt, spec.kf,
        spec.st, spec.sf);
    block.norm = std::make_unique<nn::CumulativeLayerNorm>(
        store, "drc.decn" + std::to_string(i + 1), dec_out[i]);
    block.act =
        std::make_unique<nn::PRelu>(store, "drc.deca" + std::to_string(i + 1), dec_out[i]);
    dec_.push_back(std::move(block));
  }

  head_ = std::make_unique<nn::Conv2d>(
      store, "drc.head",
      nn::ConvGeom{.in_ch = dec_out[3], .out_ch = 2, .kt = 1, .kf = 1, .st = 1, .sf = 1});
}

Spectrum DrcNet::forward(const nn::ParamStore& params, const Spectrum& input) {
  if (input.cols() != spec_.bins)
    throw Error(ErrorCode::ShapeError,
                "input has " + std::to_string(input.cols()) + " bins, the model was built for " +
                    std::to_string(spec_.bins));

  nn::FeatureMap h = stack_complex(input);
  enc_out_.clear();
  for (auto& block : enc_) {
    h = block.conv->forward(params, h);
    h = block.norm->forward(params, h);
    h = block.act->forward(params, h);
    enc_out_.push_back(h);
  }

  h = bottleneck_->forward(params, h);

  for (int i = 0; i < 4; ++i) {
    h = concat_channels(h, enc_out_[3 - i]);
    h = dec_[i].conv->forward(params, h);
    h = dec_[i].norm->forward(params, h);
    h = dec_[i].act->forward(params, h);
  }

  h = head_->forward(params, h);
  crm_raw_ = nn::tanh_map(h);
  have_forward_ = true;

  Spectrum crm(input.rows(), input.cols());
  crm.real() = crm_raw_.ch[0].matrix();
  crm.imag() = crm_raw_.ch[1].matrix();
  return crm;
}

void DrcNet::backward(const nn::ParamStore& params, const Spectrum& dcrm,
                      nn::ParamStore& grads) {
  if (!have_forward_) throw Error(ErrorCode::GradError, "backward before forward");

  nn::FeatureMap g = nn::FeatureMap::zeros(2, dcrm.rows(), dcrm.cols());
  g.ch[0] = dcrm.real().array() * (1.0 - crm_raw_.ch[0].square());
  g.ch[1] = dcrm.imag().array() * (1.0 - crm_raw_.ch[1].square());

  nn::FeatureMap d = head_->backward(params, g, grads);

  std::vector<nn::FeatureMap> skip_grads(4);
  for (int i = 3; i >= 0; --i) {
    d = dec_[i].act->backward(params, d, grads);
    d = dec_[i].norm->backward(params, d, grads);
    d = dec_[i].conv->backward(params, d, grads);
    // Split the concatenated gradient back into the deep path and the skip.
    const int skip_ch = static_cast<int>(enc_out_[3 - i].channels());
    const int deep_ch = d.channels() - skip_ch;
    nn::FeatureMap deep, skip;
    deep.ch.assign(d.ch.begin(), d.ch.begin() + deep_ch);
    skip.ch.assign(d.ch.begin() + deep_ch, d.ch.end());
    skip_grads[3 - i] = std::move(skip);
    d = std::move(deep);
  }

  d = bottleneck_->backward(params, d, grads);
  for (int c = 0; c < d.channels(); ++c) d.ch[c] += skip_grads[3].ch[c];

  for (int i = 3; i >= 0; --i) {
    d = enc_[i].act->backward(params, d, grads);
    d = enc_[i].norm->backward(params, d, grads);
    d = enc_[i].conv->backward(params, d, grads);
    if (i > 0)
      for (int c = 0; c < d.channels(); ++c) d.ch[c] += skip_grads[i - 1].ch[c];
  }
}

Real loss_eq1(const Spectrum& est, const Spectrum& target, Real alpha) {
  if (est.rows() != target.rows() || est.cols() != target.cols())
    throw Error(ErrorCode::ShapeError, "loss operands differ in shape");
  if (alpha < 0.0 || alpha > 1.0)
    throw Error(ErrorCode::BadConfig, "alpha must lie in [0, 1]");
  const Real complex_l2 = std::sqrt((est - target).squaredNorm());
  const Real mag_l2 = std::sqrt((est.cwiseAbs() - target.cwiseAbs()).squaredNorm());
  return alpha * complex_l2 + (1.0 - alpha) * mag_l2;
}

Spectrum loss_eq1_backward(const Spectrum& est, const Spectrum& target, Real alpha) {
  if (est.rows() != target.rows() || est.cols() != target.cols())
    throw Error(ErrorCode::ShapeError, "loss operands differ in shape");
  constexpr Real kGuard = 1e-12;
  const Spectrum diff = est - target;
  const Real complex_l2 = std::max(kGuard, std::sqrt(diff.squaredNorm()));
  const Eigen::ArrayXXd mag_diff =
      (est.cwiseAbs() - target.cwiseAbs()).array();
  const Real mag_l2 = std::max(kGuard, std::sqrt((mag_diff * mag_diff).sum()));

  Spectrum grad = (alpha / complex_l2) * diff;
  for (Eigen::Index t = 0; t < est.rows(); ++t) {
    for (Eigen::Index f = 0; f < est.cols(); ++f) {
      const Real mag = std::max(kGuard, std::abs(est(t, f)));
      const Complex direction = est(t, f) / mag;
      grad(t, f) += (1.0 - alpha) * (mag_diff(t, f) / mag_l2) * direction;
    }
  }
  return grad;
}

Wave drcnet_enhance(const Wave& input, int sample_rate, DrcNet& net,
                    const nn::ParamStore& params, const StftConfig& cfg) {
  ComplexSpectrogram spec = stft(input, sample_rate, cfg);
  Spectrum crm = net.forward(params, spec.data);
  ComplexSpectrogram masked = apply_crm(spec, crm);
  return istft(masked, cfg, input.size());
}

}  // namespace tse
