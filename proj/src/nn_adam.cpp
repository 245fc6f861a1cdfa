// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/nn/adam.hpp"

#include <cmath>

namespace tse::nn {

void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state, Real lr) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw Error(ErrorCode::ShapeError, "optimizer stores disagree in size");
  for (int i = 0; i < params.size(); ++i) {
    const Eigen::MatrixXd& g = grads.value(i);
    if (g.rows() != params.value(i).rows() || g.cols() != params.value(i).cols())
      throw Error(ErrorCode::ShapeError,
                  "gradient shape mismatch for " + grads.entries()[i].name);
    if (!g.allFinite())
      throw Error(ErrorCode::OptimStepRejected,
                  "non-finite gradient for " + grads.entries()[i].name);
  }

  state.step += 1;
  const Real bc1 = 1.0 - std::pow(state.beta1, static_cast<Real>(state.step));
  const Real bc2 = 1.0 - std::pow(state.beta2, static_cast<Real>(state.step));
  for (int i = 0; i < params.size(); ++i) {
    const Eigen::MatrixXd& g = grads.value(i);
    Eigen::MatrixXd& m = state.m.value(i);
    Eigen::MatrixXd& v = state.v.value(i);
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v.array().matrix() + (1.0 - state.beta2) * g.cwiseProduct(g);
    const Eigen::ArrayXXd m_hat = m.array() / bc1;
    const Eigen::ArrayXXd v_hat = v.array() / bc2;
    params.value(i).array() -= lr * m_hat / (v_hat.sqrt() + state.eps);
  }
}

}  // namespace tse::nn
