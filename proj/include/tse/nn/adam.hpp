// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_NN_ADAM_HPP_
#define TSE_NN_ADAM_HPP_

#include "tse/nn/params.hpp"

namespace tse::nn {

struct AdamState {
  ParamStore m;
  ParamStore v;
  long step = 0;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;

  static AdamState init(const ParamStore& params) {
    AdamState s;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    return s;
  }
};

// Standard bias-corrected update. Rejects non-finite gradients without
// touching parameters or state.
void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state, Real lr);

}  // namespace tse::nn

#endif  // TSE_NN_ADAM_HPP_
