// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "condfoley/nn/adam.hpp"
#include "condfoley/nn/checkpoint.hpp"
#include "condfoley/nn/layers.hpp"

using namespace condfoley;
using namespace condfoley::nn;

namespace {

// Central finite differences against the autograd result for every element
// of every leaf. The builder must reconstruct the loss from the leaves'
// current values.
double fd_max_rel_err(const std::function<Tensor()>& build, const std::vector<Tensor>& leaves,
                      float h = 1e-2f) {
    for (const auto& l : leaves) l->drop_grad();
    auto loss = build();
    backward(loss);
    std::vector<NdArray> grads;
    for (const auto& l : leaves) {
        REQUIRE(l->grad_alloc);
        grads.push_back(l->grad);
    }

    double worst = 0.0;
    for (size_t li = 0; li < leaves.size(); ++li) {
        auto& leaf = leaves[li];
        for (int64_t i = 0; i < leaf->value.size(); ++i) {
            const float orig = leaf->value[i];
            leaf->value[i] = orig + h;
            const double lp = build()->value[0];
            leaf->value[i] = orig - h;
            const double lm = build()->value[0];
            leaf->value[i] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = grads[li][i];
            const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-3});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

Tensor randleaf(std::vector<int> shape, Rng& rng, float scl = 0.7f, float off = 0.0f) {
    NdArray a(std::move(shape));
    for (auto& v : a.v) v = rng.normal() * scl + off;
    return leaf(std::move(a), true);
}

}  // namespace

TEST_CASE("grad: elementwise and activations") {
    Rng rng(1);
    auto a = randleaf({3, 4}, rng);
    auto b = randleaf({3, 4}, rng, 0.5f, 1.5f);  // keep away from relu kinks
    CHECK(fd_max_rel_err([&] { return mean_all(mul(add(a, b), sub(a, b))); }, {a, b}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(silu(scale(b, 1.3f))); }, {b}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(gelu(b)); }, {b}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(tanh_t(a)); }, {a}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(square(add_scalar(a, 0.3f))); }, {a}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(log_sigmoid(a)); }, {a}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(leaky_relu(b, 0.2f)); }, {b}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return sum_all(relu(b)); }, {b}) < 5e-3);
}

TEST_CASE("grad: bias, matmul, bmm") {
    Rng rng(2);
    auto x = randleaf({4, 3}, rng);
    auto w = randleaf({3, 5}, rng);
    auto bias = randleaf({5}, rng);
    CHECK(fd_max_rel_err([&] { return mean_all(add_bias(matmul(x, w), bias)); }, {x, w, bias}) < 5e-3);

    auto p = randleaf({2, 3, 4}, rng);
    auto q = randleaf({2, 4, 2}, rng);
    CHECK(fd_max_rel_err([&] { return mean_all(square(bmm(p, q))); }, {p, q}) < 5e-3);
}

TEST_CASE("grad: softmax, cross-entropy, bce") {
    Rng rng(3);
    auto x = randleaf({3, 5}, rng, 1.2f);
    CHECK(fd_max_rel_err([&] { return mean_all(square(softmax_lastdim(x))); }, {x}) < 5e-3);

    std::vector<int> targets = {1, 4, 0};
    CHECK(fd_max_rel_err([&] { return cross_entropy_mean(x, targets); }, {x}) < 5e-3);

    auto l = randleaf({6}, rng, 1.0f);
    std::vector<float> t = {1, 0, 1, 1, 0, 0};
    std::vector<float> wts = {0.5f, 0.1f, 0.2f, 0.1f, 0.05f, 0.05f};
    CHECK(fd_max_rel_err([&] { return bce_with_logits(l, t, wts); }, {l}) < 5e-3);
}

TEST_CASE("grad: shape ops") {
    Rng rng(4);
    auto x = randleaf({2, 3, 4}, rng);
    CHECK(fd_max_rel_err([&] { return mean_all(square(reshape(x, {6, 4}))); }, {x}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(square(permute(x, {2, 0, 1}))); }, {x}) < 5e-3);

    auto a = randleaf({2, 3}, rng);
    auto b = randleaf({4, 3}, rng);
    CHECK(fd_max_rel_err([&] { return mean_all(square(concat_rows({a, b}))); }, {a, b}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(square(slice_rows(b, 1, 2))); }, {b}) < 5e-3);
}

TEST_CASE("permute forward matches manual transpose") {
    Rng rng(5);
    NdArray a({2, 3});
    for (auto& v : a.v) v = rng.normal();
    auto t = permute(constant(a), {1, 0});
    CHECK(t->value.shape == std::vector<int>{3, 2});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) CHECK(t->value.at(j, i) == a.at(i, j));
}

TEST_CASE("grad: embedding scatters into the table") {
    Rng rng(6);
    auto table = randleaf({7, 4}, rng);
    std::vector<int> ids = {3, 0, 3, 6};
    CHECK(fd_max_rel_err([&] { return mean_all(square(embedding(table, ids))); }, {table}) < 5e-3);
}

TEST_CASE("grad: layer_norm and group_norm") {
    Rng rng(7);
    auto x = randleaf({3, 6}, rng, 1.0f);
    auto g = randleaf({6}, rng, 0.3f, 1.0f);
    auto b = randleaf({6}, rng, 0.3f);
    CHECK(fd_max_rel_err([&] { return mean_all(square(layer_norm(x, g, b))); }, {x, g, b}, 1e-2f) < 1e-2);

    auto xc = randleaf({2, 4, 3, 3}, rng, 1.0f);
    auto gc = randleaf({4}, rng, 0.3f, 1.0f);
    auto bc = randleaf({4}, rng, 0.3f);
    CHECK(fd_max_rel_err([&] { return mean_all(square(group_norm(xc, 2, gc, bc))); }, {xc, gc, bc}, 1e-2f) < 1e-2);
}

TEST_CASE("grad: conv2d with stride and padding") {
    Rng rng(8);
    auto x = randleaf({2, 3, 6, 5}, rng);
    auto w = randleaf({4, 3, 3, 3}, rng, 0.4f);
    auto b = randleaf({4}, rng, 0.2f);
    CHECK(fd_max_rel_err([&] { return mean_all(square(conv2d(x, w, b, 2, 1, 1, 1))); }, {x, w, b}) < 1e-2);
    auto y = conv2d(x, w, b, 2, 1, 1, 1);
    CHECK(y->value.shape == std::vector<int>{2, 4, 3, 5});
}

TEST_CASE("conv2d matches a direct convolution oracle") {
    Rng rng(9);
    const int N = 1, C = 2, H = 5, W = 4, O = 3, kh = 3, kw = 2, sh = 1, sw = 2, ph = 1, pw = 0;
    auto x = randleaf({N, C, H, W}, rng);
    auto w = randleaf({O, C, kh, kw}, rng);
    auto b = randleaf({O}, rng);
    auto y = conv2d(x, w, b, sh, sw, ph, pw);
    const int Ho = (H + 2 * ph - kh) / sh + 1;
    const int Wo = (W - kw) / sw + 1;
    REQUIRE(y->value.shape == std::vector<int>{N, O, Ho, Wo});
    for (int o = 0; o < O; ++o)
        for (int oy = 0; oy < Ho; ++oy)
            for (int ox = 0; ox < Wo; ++ox) {
                double acc = b->value[o];
                for (int c = 0; c < C; ++c)
                    for (int ki = 0; ki < kh; ++ki)
                        for (int kj = 0; kj < kw; ++kj) {
                            const int iy = oy * sh - ph + ki;
                            const int ix = ox * sw - pw + kj;
                            if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                            acc += static_cast<double>(x->value[((0 * C + c) * H + iy) * W + ix]) *
                                   w->value[((o * C + c) * kh + ki) * kw + kj];
                        }
                CHECK(y->value[((0 * O + o) * Ho + oy) * Wo + ox] == doctest::Approx(acc).epsilon(1e-4));
            }
}

TEST_CASE("grad: pooling, upsample, spatial mean") {
    Rng rng(10);
    auto x = randleaf({2, 3, 4, 4}, rng);
    CHECK(fd_max_rel_err([&] { return mean_all(square(upsample2x(x))); }, {x}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(square(avg_pool2d(x, 2))); }, {x}) < 5e-3);
    CHECK(fd_max_rel_err([&] { return mean_all(square(mean_spatial(x))); }, {x}) < 5e-3);
}

TEST_CASE("detach blocks gradients") {
    Rng rng(11);
    auto a = randleaf({3}, rng);
    auto loss = mean_all(mul(a, detach(a)));
    backward(loss);
    REQUIRE(a->grad_alloc);
    // d/da mean(a * sg[a]) treats sg[a] as constant
    for (int i = 0; i < 3; ++i)
        CHECK(a->grad[i] == doctest::Approx(a->value[i] / 3.0f));
}

TEST_CASE("adam converges on a quadratic") {
    Rng rng(12);
    ParamStore ps;
    auto theta = ps.add("theta", NdArray::randn({4}, rng, 1.0f));
    NdArray target({4});
    for (int i = 0; i < 4; ++i) target[i] = static_cast<float>(i) - 1.5f;
    Adam opt(ps.all(), 0.1f);
    for (int step = 0; step < 300; ++step) {
        opt.zero_grad();
        auto loss = mse(theta, constant(target));
        backward(loss);
        opt.step();
    }
    for (int i = 0; i < 4; ++i) CHECK(theta->value[i] == doctest::Approx(target[i]).epsilon(1e-2));
}

TEST_CASE("checkpoint round trip through a store") {
    Rng rng(13);
    ParamStore ps;
    Linear::create(ps, "enc.fc", 3, 5, rng);
    Conv2dLayer::create(ps, "enc.conv", 2, 4, 3, 3, 1, 1, 1, 1, rng);

    Checkpoint ck;
    ck.meta["seed"] = 13;
    ck.meta["epoch"] = 7;
    ck.meta["loss_trace"] = {1.0, 0.5};
    ck.put_store(ps);
    ck.save("test_ck.ckpt");

    auto loaded = Checkpoint::load("test_ck.ckpt");
    CHECK(loaded.meta.at("epoch").get<int>() == 7);

    Rng rng2(99);
    ParamStore ps2;
    Linear::create(ps2, "enc.fc", 3, 5, rng2);
    Conv2dLayer::create(ps2, "enc.conv", 2, 4, 3, 3, 1, 1, 1, 1, rng2);
    loaded.load_into(ps2);
    for (const auto& [name, t] : ps.params)
        CHECK(ps2.get(name)->value.v == t->value.v);

    // version / corruption guards
    CHECK_THROWS(Checkpoint::load("does_not_exist.ckpt"));
    std::remove("test_ck.ckpt");
}

TEST_CASE("backward accumulates across shared subgraphs") {
    Rng rng(14);
    auto a = randleaf({2}, rng);
    auto s = square(a);
    auto loss = mean_all(add(s, s));  // d/da = 2 * 2a / 2
    backward(loss);
    for (int i = 0; i < 2; ++i)
        CHECK(a->grad[i] == doctest::Approx(2.0f * a->value[i]));
}
