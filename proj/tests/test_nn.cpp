// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "grad_check.hpp"
#include "tse/nn/adam.hpp"
#include "tse/nn/layers.hpp"
#include "tse/nn/params.hpp"

using namespace tse;
using namespace tse::nn;

TEST_CASE("gated conv: zeroed gate weights halve the linear branch") {
  ParamStore store;
  ConvGeom geom{.in_ch = 2, .out_ch = 3, .kt = 2, .kf = 3, .st = 1, .sf = 2};
  GatedConv2d conv(store, "g", geom);
  store.randomize(1);
  store.value("g.wb").setZero();
  store.value("g.bb").setZero();  // sigmoid(0) = 0.5

  FeatureMap x = test::random_feature_map(2, 6, 9, 2);
  FeatureMap y = conv.forward(store, x);
  FeatureMap lin = conv_apply(store.value("g.wa"), store.value("g.ba").col(0), x, geom);
  for (int c = 0; c < 3; ++c)
    CHECK((y.ch[c] - 0.5 * lin.ch[c]).abs().maxCoeff() < 1e-14);
}

TEST_CASE("gated conv shape: kernel (1,5) stride (1,2) maps F=256 to 128") {
  ParamStore store;
  ConvGeom geom{.in_ch = 2, .out_ch = 32, .kt = 1, .kf = 5, .st = 1, .sf = 2};
  GatedConv2d conv(store, "g", geom);
  store.randomize(3);
  FeatureMap x = test::random_feature_map(2, 4, 256, 4);
  FeatureMap y = conv.forward(store, x);
  CHECK(y.channels() == 32);
  CHECK(y.frames() == 4);
  CHECK(y.bins() == 128);
}

TEST_CASE("gated conv output shape formula holds over random specs") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ch(1, 4), k(1, 5), s(1, 3), dim(6, 40);
  for (int i = 0; i < 50; ++i) {
    ConvGeom geom{.in_ch = ch(rng), .out_ch = ch(rng), .kt = k(rng), .kf = k(rng),
                  .st = s(rng), .sf = s(rng)};
    ParamStore store;
    GatedConv2d conv(store, "g", geom);
    store.randomize(i);
    const Eigen::Index frames = dim(rng), bins = dim(rng);
    FeatureMap x = test::random_feature_map(geom.in_ch, frames, bins, 100 + i);
    FeatureMap y = conv.forward(store, x);
    CHECK(y.frames() == (frames - 1) / geom.st + 1);
    CHECK(y.bins() == (bins - 1) / geom.sf + 1);  // == ceil(bins / sf)
  }
}

TEST_CASE("gated conv: identity construction passes the input through") {
  ParamStore store;
  ConvGeom geom{.in_ch = 3, .out_ch = 3, .kt = 1, .kf = 1, .st = 1, .sf = 1};
  GatedConv2d conv(store, "g", geom);
  store.randomize(6);
  store.value("g.wa") = Eigen::MatrixXd::Identity(3, 3);
  store.value("g.ba").setZero();
  store.value("g.wb").setZero();
  store.value("g.bb").setConstant(1e3);  // sigmoid saturates to exactly 1.0

  FeatureMap x = test::random_feature_map(3, 5, 7, 7);
  FeatureMap y = conv.forward(store, x);
  for (int c = 0; c < 3; ++c) CHECK((y.ch[c] - x.ch[c]).abs().maxCoeff() == 0.0);
}

TEST_CASE("causal time padding: later frames cannot affect earlier outputs") {
  ParamStore store;
  ConvGeom geom{.in_ch = 2, .out_ch = 2, .kt = 2, .kf = 3, .st = 1, .sf = 2};
  GatedConv2d conv(store, "g", geom);
  store.randomize(8);
  FeatureMap x = test::random_feature_map(2, 10, 8, 9);
  FeatureMap y0 = conv.forward(store, x);
  FeatureMap x2 = x;
  for (int c = 0; c < 2; ++c) x2.ch[c].row(6) += 3.0;  // perturb frame 6
  FeatureMap y1 = conv.forward(store, x2);
  for (int c = 0; c < 2; ++c) {
    CHECK((y0.ch[c].topRows(6) - y1.ch[c].topRows(6)).abs().maxCoeff() == 0.0);
    CHECK((y0.ch[c].row(6) - y1.ch[c].row(6)).abs().maxCoeff() > 0.0);
  }
}

TEST_CASE("transposed gated conv inverts the frequency downsampling chain") {
  // 17 -> 9 -> 17 with the same kernel/stride as the decoder blocks.
  ParamStore store;
  ConvGeom down{.in_ch = 2, .out_ch = 4, .kt = 1, .kf = 5, .st = 1, .sf = 2};
  GatedConv2d enc(store, "enc", down);
  TransposedGatedConv2d dec(store, "dec", 4, 2, 1, 5, 1, 2);
  store.randomize(10);
  FeatureMap x = test::random_feature_map(2, 3, 17, 11);
  FeatureMap mid = enc.forward(store, x);
  CHECK(mid.bins() == 9);
  FeatureMap back = dec.forward(store, mid);
  CHECK(back.bins() == 17);
  CHECK(back.frames() == 3);
  CHECK(back.channels() == 2);
}

TEST_CASE("layer gradients match central finite differences") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    SUBCASE(("seed " + std::to_string(seed)).c_str()) {
      {
        ParamStore store;
        ConvGeom geom{.in_ch = 2, .out_ch = 3, .kt = 2, .kf = 3, .st = 1, .sf = 2};
        GatedConv2d conv(store, "g", geom);
        store.randomize(seed);
        FeatureMap x = test::random_feature_map(2, 5, 9, 1000 + seed);
        auto rep = test::fd_check_layer(conv, store, x, 2000 + seed);
        CHECK(rep.param_rel <= 1e-4);
        CHECK(rep.input_rel <= 1e-4);
      }
      {
        ParamStore store;
        TransposedGatedConv2d up(store, "u", 3, 2, 2, 3, 1, 2);
        store.randomize(seed);
        FeatureMap x = test::random_feature_map(3, 4, 9, 1100 + seed);
        auto rep = test::fd_check_layer(up, store, x, 2100 + seed);
        CHECK(rep.param_rel <= 1e-4);
        CHECK(rep.input_rel <= 1e-4);
      }
      {
        ParamStore store;
        ConvGeom geom{.in_ch = 3, .out_ch = 2, .kt = 1, .kf = 1, .st = 1, .sf = 1};
        Conv2d head(store, "h", geom);
        store.randomize(seed);
        FeatureMap x = test::random_feature_map(3, 4, 6, 1200 + seed);
        auto rep = test::fd_check_layer(head, store, x, 2200 + seed);
        CHECK(rep.param_rel <= 1e-4);
        CHECK(rep.input_rel <= 1e-4);
      }
      {
        ParamStore store;
        CumulativeLayerNorm cln(store, "n", 3);
        store.randomize(seed);
        // shift gain/bias off their init so the check is not trivial
        store.value("n.gain").setConstant(1.3);
        store.value("n.bias").setConstant(-0.2);
        FeatureMap x = test::random_feature_map(3, 6, 5, 1300 + seed);
        auto rep = test::fd_check_layer(cln, store, x, 2300 + seed);
        CHECK(rep.param_rel <= 1e-4);
        CHECK(rep.input_rel <= 1e-4);
      }
      {
        ParamStore store;
        PRelu act(store, "p", 3);
        store.randomize(seed);
        FeatureMap x = test::random_feature_map(3, 5, 6, 1400 + seed);
        auto rep = test::fd_check_layer(act, store, x, 2400 + seed);
        CHECK(rep.param_rel <= 1e-4);
        CHECK(rep.input_rel <= 1e-4);
      }
      {
        ParamStore store;
        ElmanBottleneck rnn(store, "r", 2, 4, 3);
        store.randomize(seed);
        FeatureMap x = test::random_feature_map(2, 6, 4, 1500 + seed);
        auto rep = test::fd_check_layer(rnn, store, x, 2500 + seed);
        CHECK(rep.param_rel <= 1e-4);
        CHECK(rep.input_rel <= 1e-4);
      }
    }
  }
}

TEST_CASE("cLN: constant input collapses to the bias") {
  ParamStore store;
  CumulativeLayerNorm cln(store, "n", 2);
  store.randomize(20);
  store.value("n.bias").setConstant(0.7);
  FeatureMap x = FeatureMap::zeros(2, 5, 4);
  for (auto& m : x.ch) m.setConstant(3.25);
  FeatureMap y = cln.forward(store, x);
  for (int c = 0; c < 2; ++c)
    CHECK((y.ch[c] - 0.7).abs().maxCoeff() < 1e-6);
}

TEST_CASE("cLN: frame-normalized input comes out with zero mean, unit variance") {
  // Every frame is z-scored across (channels, bins), so all cumulative
  // prefixes share mean 0 / variance 1 and the layer acts as the identity.
  const int channels = 3;
  const Eigen::Index frames = 12, bins = 16;
  FeatureMap x = test::random_feature_map(channels, frames, bins, 21);
  const Real n = static_cast<Real>(channels) * bins;
  for (Eigen::Index t = 0; t < frames; ++t) {
    Real s1 = 0, s2 = 0;
    for (int c = 0; c < channels; ++c) s1 += x.ch[c].row(t).sum();
    const Real mu = s1 / n;
    for (int c = 0; c < channels; ++c) s2 += (x.ch[c].row(t) - mu).square().sum();
    const Real sd = std::sqrt(s2 / n);
    for (int c = 0; c < channels; ++c) x.ch[c].row(t) = (x.ch[c].row(t) - mu) / sd;
  }

  ParamStore store;
  CumulativeLayerNorm cln(store, "n", channels);
  store.randomize(22);  // gain 1, bias 0
  FeatureMap y = cln.forward(store, x);

  Real s1 = 0, s2 = 0;
  for (int c = 0; c < channels; ++c) {
    s1 += y.ch[c].sum();
    s2 += y.ch[c].square().sum();
  }
  const Real total = n * frames;
  const Real mean = s1 / total;
  const Real var = s2 / total - mean * mean;
  CHECK(std::abs(mean) <= 1e-4);
  CHECK(std::abs(var - 1.0) <= 1e-4);
}

TEST_CASE("cLN is causal: outputs up to t ignore frames after t") {
  ParamStore store;
  CumulativeLayerNorm cln(store, "n", 2);
  store.randomize(23);
  FeatureMap x = test::random_feature_map(2, 8, 5, 24);
  FeatureMap y0 = cln.forward(store, x);
  FeatureMap x2 = x;
  for (int c = 0; c < 2; ++c) x2.ch[c].row(5).setConstant(99.0);
  FeatureMap y1 = cln.forward(store, x2);
  for (int c = 0; c < 2; ++c)
    CHECK((y0.ch[c].topRows(5) - y1.ch[c].topRows(5)).abs().maxCoeff() == 0.0);
}

TEST_CASE("PReLU slope special cases") {
  ParamStore store;
  PRelu act(store, "p", 1);
  store.randomize(30);
  FeatureMap x = FeatureMap::zeros(1, 1, 3);
  x.ch[0](0, 0) = -2.0;
  x.ch[0](0, 1) = 1.5;
  x.ch[0](0, 2) = -0.5;

  store.value("p.slope").setConstant(1.0);
  FeatureMap y = act.forward(store, x);
  CHECK((y.ch[0] - x.ch[0]).abs().maxCoeff() == 0.0);  // identity

  store.value("p.slope").setConstant(0.0);
  y = act.forward(store, x);
  CHECK(y.ch[0](0, 0) == 0.0);  // ReLU
  CHECK(y.ch[0](0, 1) == 1.5);

  store.value("p.slope").setConstant(0.25);
  y = act.forward(store, x);
  CHECK(y.ch[0](0, 0) == doctest::Approx(-0.5));
}

TEST_CASE("backward on a 1x1 conv reproduces the closed-form linear-layer gradient") {
  // Frames act as batch rows: y_t = W x_t, loss = mean squared error.
  const int d_in = 4, d_out = 3;
  const Eigen::Index n = 6;
  ParamStore store;
  ConvGeom geom{.in_ch = d_in, .out_ch = d_out, .kt = 1, .kf = 1, .st = 1, .sf = 1};
  Conv2d lin(store, "l", geom);
  store.randomize(40);
  store.value("l.b").setZero();

  FeatureMap x = test::random_feature_map(d_in, n, 1, 41);
  FeatureMap target = test::random_feature_map(d_out, n, 1, 42);

  FeatureMap y = lin.forward(store, x);
  FeatureMap gy = y;
  const Real scale = 2.0 / (n * d_out);
  for (int c = 0; c < d_out; ++c) gy.ch[c] = scale * (y.ch[c] - target.ch[c]);
  ParamStore grads = store.zeros_like();
  lin.backward(store, gy, grads);

  Eigen::MatrixXd xm(n, d_in), tm(n, d_out);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (int c = 0; c < d_in; ++c) xm(t, c) = x.ch[c](t, 0);
    for (int c = 0; c < d_out; ++c) tm(t, c) = target.ch[c](t, 0);
  }
  const Eigen::MatrixXd w = store.value("l.w");
  const Eigen::MatrixXd closed = scale * (xm * w.transpose() - tm).transpose() * xm;
  CHECK((grads.value("l.w") - closed).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero upstream gradient produces zero parameter gradients") {
  ParamStore store;
  ConvGeom geom{.in_ch = 2, .out_ch = 2, .kt = 2, .kf = 3, .st = 1, .sf = 2};
  GatedConv2d conv(store, "g", geom);
  store.randomize(50);
  FeatureMap x = test::random_feature_map(2, 5, 8, 51);
  FeatureMap y = conv.forward(store, x);
  FeatureMap zero = FeatureMap::zeros(y.channels(), y.frames(), y.bins());
  ParamStore grads = store.zeros_like();
  FeatureMap dx = conv.backward(store, zero, grads);
  for (int i = 0; i < grads.size(); ++i)
    CHECK(grads.value(i).cwiseAbs().maxCoeff() == 0.0);
  for (int c = 0; c < 2; ++c) CHECK(dx.ch[c].abs().maxCoeff() == 0.0);
}

TEST_CASE("backward before forward is a usage error") {
  ParamStore store;
  ConvGeom geom{.in_ch = 1, .out_ch = 1, .kt = 1, .kf = 1, .st = 1, .sf = 1};
  GatedConv2d conv(store, "g", geom);
  store.randomize(52);
  ParamStore grads = store.zeros_like();
  FeatureMap gy = FeatureMap::zeros(1, 2, 2);
  CHECK_THROWS_WITH_AS(conv.backward(store, gy, grads), doctest::Contains("GradError"),
                       Error);
}

TEST_CASE("identical seeds give bit-identical initialization and outputs") {
  auto build = [](uint64_t seed) {
    ParamStore store;
    ConvGeom geom{.in_ch = 2, .out_ch = 3, .kt = 2, .kf = 3, .st = 1, .sf = 2};
    GatedConv2d conv(store, "g", geom);
    store.randomize(seed);
    FeatureMap x = test::random_feature_map(2, 4, 6, 999);
    return conv.forward(store, x);
  };
  FeatureMap a = build(7), b = build(7), c = build(8);
  for (int i = 0; i < 3; ++i) {
    CHECK((a.ch[i] - b.ch[i]).abs().maxCoeff() == 0.0);
  }
  bool any_diff = false;
  for (int i = 0; i < 3; ++i)
    if ((a.ch[i] - c.ch[i]).abs().maxCoeff() > 0.0) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("adam: zero gradients leave parameters untouched") {
  ParamStore params;
  params.add_uniform("w", 3, 3, 0.5);
  params.randomize(60);
  const Eigen::MatrixXd before = params.value("w");
  ParamStore grads = params.zeros_like();
  AdamState state = AdamState::init(params);
  adam_step(params, grads, state, 1e-3);
  CHECK((params.value("w") - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam: first step moves opposite the gradient sign") {
  ParamStore params;
  params.add_constant("w", 2, 2, 1.0);
  params.randomize(61);
  ParamStore grads = params.zeros_like();
  grads.value("w") << 0.5, -2.0, 1e-3, -1e-3;
  AdamState state = AdamState::init(params);
  adam_step(params, grads, state, 1e-3);
  const Eigen::MatrixXd delta = params.value("w").array() - 1.0;
  CHECK(delta(0, 0) < 0.0);
  CHECK(delta(0, 1) > 0.0);
  CHECK(delta(1, 0) < 0.0);
  CHECK(delta(1, 1) > 0.0);
}

TEST_CASE("adam descends a quadratic bowl monotonically after warmup") {
  ParamStore params;
  params.add_constant("w", 4, 1, 1.0);
  params.randomize(62);
  AdamState state = AdamState::init(params);
  Real prev = params.value("w").squaredNorm();
  for (int step = 0; step < 200; ++step) {
    ParamStore grads = params.zeros_like();
    grads.value("w") = 2.0 * params.value("w");
    adam_step(params, grads, state, 1e-3);
    const Real f = params.value("w").squaredNorm();
    if (step >= 5) CHECK(f < prev);
    prev = f;
  }
  CHECK(prev < 1.0 * 4);
}

TEST_CASE("adam rejects non-finite gradients without side effects") {
  ParamStore params;
  params.add_constant("w", 2, 1, 1.0);
  params.randomize(63);
  ParamStore grads = params.zeros_like();
  grads.value("w")(0, 0) = std::numeric_limits<Real>::quiet_NaN();
  AdamState state = AdamState::init(params);
  CHECK_THROWS_WITH_AS(adam_step(params, grads, state, 1e-3),
                       doctest::Contains("OptimStepRejected"), Error);
  CHECK(params.value("w")(0, 0) == 1.0);
  CHECK(state.step == 0);
}

TEST_CASE("checkpoint round trip preserves values and rejects bad shapes") {
  ParamStore params;
  params.add_uniform("a", 3, 4, 0.3);
  params.add_constant("b", 2, 1, 0.25);
  params.randomize(70);
  const std::string path = "/tmp/tse_ckpt_test.json";
  nlohmann::json arch = {{"kind", "test"}, {"width", 4}};
  save_checkpoint(path, params, arch);

  ParamStore loaded;
  loaded.add_uniform("a", 3, 4, 0.3);
  loaded.add_constant("b", 2, 1, 0.25);
  nlohmann::json got_arch;
  load_checkpoint(path, loaded, &got_arch);
  CHECK(got_arch["kind"] == "test");
  CHECK((loaded.value("a") - params.value("a")).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.value("b") - params.value("b")).cwiseAbs().maxCoeff() == 0.0);

  ParamStore wrong;
  wrong.add_uniform("a", 3, 5, 0.3);  // bad shape
  wrong.add_constant("b", 2, 1, 0.25);
  CHECK_THROWS_WITH_AS(load_checkpoint(path, wrong, nullptr),
                       doctest::Contains("ShapeError"), Error);
  std::remove(path.c_str());
}
