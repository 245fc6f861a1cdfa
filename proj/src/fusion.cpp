// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/fusion.hpp"

#include <cstdint>
#include <fstream>

#include "tse/signal.hpp"

namespace tse {

void FusionInput::validate() const {
  if (farfield.channels() != 6)
    throw Error(ErrorCode::ShapeError, "fusion expects exactly 6 far-field channels");
  if (gss_out.size() != farfield.num_samples())
    throw Error(ErrorCode::ShapeError, "far-field and companion wave lengths differ");
  stft.validate(farfield.sample_rate);
}

AssembledFeatures assemble_channels(const FusionInput& input) {
  input.validate();
  const int rate = input.farfield.sample_rate;
  const Eigen::Index n = input.farfield.num_samples();

  Eigen::MatrixXd stacked(8, n);
  stacked.topRows(6) = input.farfield.samples;
  stacked.row(6) = average_channels(input.farfield).transpose();
  stacked.row(7) = input.gss_out.transpose();

  LoudnessResult normed = loudness_normalize(MultiChannelWave(stacked, rate), -25.0);

  AssembledFeatures out;
  for (int c = 0; c < 8; ++c) {
    ComplexSpectrogram spec = stft(normed.wave.channel(c), rate, input.stft);
    if (c == 0)
      out.mags = nn::FeatureMap::zeros(8, spec.frames(), spec.bins());
    out.mags.ch[c] = spec.data.cwiseAbs().array();
    out.silent[c] = normed.silent[c];
  }
  return out;
}

FdNet::FdNet(nn::ParamStore& store, int in_ch, int width)
    : in_ch_(in_ch),
      width_(width),
      enc_(store, "fd.enc",
           nn::ConvGeom{.in_ch = in_ch, .out_ch = width, .kt = 2, .kf = 3, .st = 1, .sf = 2}),
      cln_(store, "fd.cln", width),
      act_(store, "fd.act", width),
      dec_(store, "fd.dec", width, 1, 2, 3, 1, 2) {}

RealMask FdNet::forward(const nn::ParamStore& params, const nn::FeatureMap& features) {
  if (features.channels() != in_ch_)
    throw Error(ErrorCode::ShapeError, "feature channel count mismatch");
  nn::FeatureMap h = enc_.forward(params, features);
  h = cln_.forward(params, h);
  h = act_.forward(params, h);
  h = dec_.forward(params, h);
  if (h.bins() != features.bins() || h.frames() != features.frames())
    throw Error(ErrorCode::ShapeError, "mask head failed to restore feature shape");
  mask_ = 1.0 / (1.0 + (-h.ch[0]).exp());
  have_forward_ = true;
  return mask_;
}

nn::FeatureMap FdNet::backward(const nn::ParamStore& params, const RealMask& dmask,
                               nn::ParamStore& grads) {
  if (!have_forward_) throw Error(ErrorCode::GradError, "backward before forward");
  nn::FeatureMap g = nn::FeatureMap::zeros(1, mask_.rows(), mask_.cols());
  g.ch[0] = dmask * mask_ * (1.0 - mask_);
  nn::FeatureMap d = dec_.backward(params, g, grads);
  d = act_.backward(params, d, grads);
  d = cln_.backward(params, d, grads);
  return enc_.backward(params, d, grads);
}

nlohmann::json FdNet::arch() const {
  return {{"kind", "fd_mask"}, {"in_ch", in_ch_}, {"width", width_},
          {"kernel", {2, 3}}, {"stride", {1, 2}}};
}

Eigen::MatrixXd read_embedding(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::BadFile, "cannot open " + path);
  int64_t rows = 0, cols = 0;
  is.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  is.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!is || rows <= 0 || cols <= 0)
    throw Error(ErrorCode::BadFile, path + ": bad embedding header");
  Eigen::MatrixXd m(rows, cols);
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j) {
      double v;
      is.read(reinterpret_cast<char*>(&v), sizeof(v));
      m(i, j) = v;
    }
  if (!is) throw Error(ErrorCode::BadFile, path + ": embedding truncated");
  return m;
}

void write_embedding(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::BadFile, "cannot write " + path);
  const int64_t rows = m.rows(), cols = m.cols();
  os.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  os.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j) {
      const double v = m(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

Wave fusion_extract(const FusionInput& input, FdNet& net, const nn::ParamStore& params,
                    const TargetExtractor& extractor,
                    const std::optional<Eigen::MatrixXd>& visual_cues) {
  AssembledFeatures features = assemble_channels(input);
  RealMask mask = net.forward(params, features.mags);

  const int rate = input.farfield.sample_rate;
  ComplexSpectrogram avg_spec =
      stft(average_channels(input.farfield), rate, input.stft);
  // Real mask on the complex average: magnitude scaled, phase passed through.
  avg_spec.data = avg_spec.data.cwiseProduct(mask.matrix().cast<Complex>());
  Wave fused = istft(avg_spec, input.stft, input.farfield.num_samples());
  return extractor.extract(fused, rate, visual_cues);
}

}  // namespace tse
