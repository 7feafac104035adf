#include <doctest.h>

#include <cstdio>

#include "maskr/adam.hpp"
#include "maskr/checkpoint.hpp"
#include "maskr/layers.hpp"
#include "maskr/tape.hpp"

#include "support/test_util.hpp"

using namespace maskr;
using namespace maskr::nn;

namespace {

// fd-check a tape-built scalar loss against its analytic grads
GradCheckResult check_tape_loss(const std::function<Var(Tape&)>& build,
                                std::vector<Parameter*> params, double h = 1e-3) {
    auto loss_value = [&]() {
        Tape t;
        return t.scalar_double(build(t));
    };
    auto compute = [&]() {
        Tape t;
        t.backward(build(t));
    };
    return grad_check(loss_value, compute, std::move(params), h);
}

}  // namespace

TEST_SUITE_BEGIN("nn");

TEST_CASE("linear: zero input broadcasts bias per row") {
    Rng rng(1);
    LinearLayer lin("lin", 4, 3, rng);
    for (size_t i = 0; i < lin.bias.value.data.size(); ++i)
        lin.bias.value.data[i] = 0.5f * static_cast<float>(i + 1);
    Tape t;
    Var x = t.input(Tensor::zeros({5, 4}));
    Var y = lin.forward(t, x);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(t.val(y).at2(r, c) == lin.bias.value.data[static_cast<size_t>(c)]);
}

TEST_CASE("linear: identity weight passes input through") {
    Rng rng(2);
    LinearLayer lin("lin", 3, 3, rng);
    std::fill(lin.weight.value.data.begin(), lin.weight.value.data.end(), 0.0f);
    for (int i = 0; i < 3; ++i) lin.weight.value.at2(i, i) = 1.0f;
    std::fill(lin.bias.value.data.begin(), lin.bias.value.data.end(), 0.0f);
    Tensor x = testutil::random_tensor(rng, {4, 3});
    Tape t;
    Var y = lin.forward(t, t.input(x));
    CHECK(t.val(y).data == x.data);
}

TEST_CASE("linear: shape mismatch raises dimension error") {
    Rng rng(3);
    LinearLayer lin("lin", 4, 3, rng);
    Tape t;
    Var x = t.input(Tensor::zeros({5, 7}));
    CHECK_THROWS_AS(lin.forward(t, x), DimensionError);
}

TEST_CASE("linear: analytic gradient matches central differences") {
    Rng rng(4);
    LinearLayer lin("lin", 4, 3, rng);
    Tensor x = testutil::random_tensor(rng, {3, 4});
    auto build = [&](Tape& t) { return t.half_sum_squares(lin.forward(t, t.input(x))); };
    auto res = check_tape_loss(build, {&lin.weight, &lin.bias});
    CHECK(res.max_rel_err < 1e-3);
}

TEST_CASE("layer_norm: constant vector maps to beta") {
    LayerNormLayer ln("ln", 6);
    Tape t;
    Var y = ln.forward(t, t.input(Tensor::full({2, 6}, 3.25f)));
    for (float v : t.val(y).data) CHECK(v == doctest::Approx(0.0f));  // beta = 0

    for (float& b : ln.beta.value.data) b = 1.5f;
    Tape t2;
    Var y2 = ln.forward(t2, t2.input(Tensor::full({2, 6}, 3.25f)));
    for (float v : t2.val(y2).data) CHECK(v == doctest::Approx(1.5f));
}

TEST_CASE("layer_norm: gamma=0 collapses output to beta") {
    Rng rng(5);
    LayerNormLayer ln("ln", 5);
    std::fill(ln.gamma.value.data.begin(), ln.gamma.value.data.end(), 0.0f);
    for (size_t i = 0; i < 5; ++i) ln.beta.value.data[i] = static_cast<float>(i) - 2.0f;
    Tape t;
    Var y = ln.forward(t, t.input(testutil::random_tensor(rng, {3, 5})));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 5; ++c)
            CHECK(t.val(y).at2(r, c) == doctest::Approx(ln.beta.value.data[static_cast<size_t>(c)]));
}

TEST_CASE("layer_norm: zero dim rejected") {
    Tape t;
    Var x = t.input(Tensor::zeros({3, 0}));
    Var g = t.input(Tensor::zeros({0}));
    CHECK_THROWS_AS(t.layer_norm(x, g, g, 1e-5f), ConfigError);
}

TEST_CASE("layer_norm: gradient check") {
    Rng rng(6);
    LayerNormLayer ln("ln", 8);
    for (float& v : ln.gamma.value.data) v = rng.uniform_float(0.5f, 1.5f);
    for (float& v : ln.beta.value.data) v = rng.uniform_float(-0.3f, 0.3f);
    Parameter xin("x", testutil::random_tensor(rng, {4, 8}));
    auto build = [&](Tape& t) {
        return t.half_sum_squares(t.gelu(ln.forward(t, t.param(xin))));
    };
    auto res = check_tape_loss(build, {&ln.gamma, &ln.beta, &xin});
    CHECK(res.max_rel_err < 1e-3);
}

TEST_CASE("attention: single token gets weight 1.0 and the value path") {
    Rng rng(7);
    TransformerBlockConfig cfg{8, 2, 0};
    TransformerBlock blk("blk", cfg, rng);
    Tensor x = testutil::random_tensor(rng, {1, 8});
    Tape t;
    Var xv = t.input(x);
    Var attn = multi_head_attention(t, xv, cfg, blk.wq, blk.wk, blk.wv, blk.wo, false);
    // with one token softmax is [1.0], so output == wo(wv(x))
    Tape t2;
    Var direct = blk.wo.forward(t2, blk.wv.forward(t2, t2.input(x)));
    for (int i = 0; i < 8; ++i)
        CHECK(t.val(attn).at2(0, i) == doctest::Approx(t2.val(direct).at2(0, i)).epsilon(1e-5));
}

TEST_CASE("attention: softmax rows sum to one") {
    Rng rng(8);
    Tape t;
    Tensor scores = testutil::random_tensor(rng, {2, 5, 5}, 3.0f);
    Var p = t.softmax_last(t.input(scores), false);
    for (int b = 0; b < 2; ++b)
        for (int r = 0; r < 5; ++r) {
            double s = 0.0;
            for (int c = 0; c < 5; ++c) s += t.val(p).at3(b, r, c);
            CHECK(std::abs(s - 1.0) < 1e-6);
        }
}

TEST_CASE("attention: causal output at position 0 ignores the future") {
    Rng rng(9);
    TransformerBlockConfig cfg{8, 2, 0};
    TransformerBlock blk("blk", cfg, rng);
    Tensor x = testutil::random_tensor(rng, {4, 8});
    Tape t1;
    Var y1 = blk.forward(t1, t1.input(x), true);
    Tensor x2 = x;
    for (int i = 0; i < 8; ++i) x2.at2(3, i) += 0.7f;  // perturb a later position
    for (int i = 0; i < 8; ++i) x2.at2(1, i) -= 0.4f;
    Tape t2;
    Var y2 = blk.forward(t2, t2.input(x2), true);
    for (int i = 0; i < 8; ++i)
        CHECK(t1.val(y1).at2(0, i) == t2.val(y2).at2(0, i));  // bit-equal
}

TEST_CASE("attention: non-causal block passes composed gradient check") {
    Rng rng(10);
    TransformerBlockConfig cfg{8, 2, 0};
    TransformerBlock blk("blk", cfg, rng);
    Tensor x = testutil::random_tensor(rng, {3, 8});
    auto build = [&](Tape& t) {
        return t.half_sum_squares(blk.forward(t, t.input(x), false));
    };
    std::vector<Parameter*> params;
    blk.collect(params);
    auto res = check_tape_loss(build, params);
    CAPTURE(res.worst_param);
    CHECK(res.max_rel_err < 1e-2);
}

TEST_CASE("cross_entropy: uniform logits give ln(K)") {
    Tape t;
    Var logits = t.input(Tensor::zeros({5, 64}));
    std::vector<int> targets = {3, 10, 0, 63, 7};
    std::vector<uint8_t> mask = {1, 1, 0, 1, 1};
    int count = 0;
    Var loss = t.cross_entropy_masked_sum(logits, targets, mask, &count);
    CHECK(count == 4);
    CHECK(t.val(loss).data[0] / 4.0f == doctest::Approx(std::log(64.0)).epsilon(1e-6));
}

TEST_CASE("cross_entropy: confident correct logits drive loss to zero") {
    Tape t;
    Tensor logits = Tensor::zeros({3, 16});
    std::vector<int> targets = {2, 5, 9};
    for (int r = 0; r < 3; ++r) logits.at2(r, targets[static_cast<size_t>(r)]) = 25.0f;
    std::vector<uint8_t> mask = {1, 1, 1};
    Var loss = t.cross_entropy_masked_sum(t.input(logits), targets, mask);
    CHECK(t.val(loss).data[0] / 3.0f < 1e-5f);
}

TEST_CASE("cross_entropy: unmasked positions have exactly zero gradient") {
    Rng rng(11);
    Parameter logits("logits", testutil::random_tensor(rng, {6, 8}, 2.0f));
    std::vector<int> targets = {0, 1, 2, 3, 4, 5};
    std::vector<uint8_t> mask = {1, 0, 1, 0, 0, 1};
    Tape t;
    Var loss = t.cross_entropy_masked_sum(t.param(logits), targets, mask);
    t.backward(loss);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 8; ++c) {
            float g = logits.grad.at2(r, c);
            if (mask[static_cast<size_t>(r)])
                CHECK(g != 0.0f);
            else
                CHECK(g == 0.0f);  // bit-zero
        }
}

TEST_CASE("cross_entropy: empty mask raises") {
    Tape t;
    Var logits = t.input(Tensor::zeros({2, 4}));
    std::vector<int> targets = {0, 1};
    std::vector<uint8_t> mask = {0, 0};
    CHECK_THROWS_AS(t.cross_entropy_masked_sum(logits, targets, mask), DataError);
}

TEST_CASE("cross_entropy: gradient check") {
    Rng rng(12);
    Parameter logits("logits", testutil::random_tensor(rng, {4, 6}, 2.0f));
    std::vector<int> targets = {1, 5, 0, 3};
    std::vector<uint8_t> mask = {1, 1, 0, 1};
    auto build = [&](Tape& t) {
        return t.scale(t.cross_entropy_masked_sum(t.param(logits), targets, mask), 1.0f / 3.0f);
    };
    auto res = check_tape_loss(build, {&logits});
    CHECK(res.max_rel_err < 1e-3);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    Rng rng(13);
    Parameter p("p", testutil::random_tensor(rng, {4, 4}));
    Tensor before = p.value;
    Adam opt({&p}, {});
    for (int i = 0; i < 25; ++i) {
        p.zero_grad();
        opt.step();
    }
    CHECK(p.value.data == before.data);
}

TEST_CASE("adam: first-step magnitude is about lr for unit gradient") {
    Parameter p("p", Tensor::scalar(1.0f));
    AdamConfig cfg;
    cfg.lr = 1e-4f;
    Adam opt({&p}, cfg);
    p.grad.data[0] = 1.0f;
    opt.step();
    // bias-corrected first step: lr * g / (|g| + eps) ~= lr
    CHECK(std::abs((1.0f - p.value.data[0]) - cfg.lr) < 1e-6f);
}

TEST_CASE("adam: converges on a convex quadratic") {
    Parameter p("p", Tensor({2}, {2.0f, -1.5f}));
    std::vector<float> target = {0.7f, 0.3f};
    AdamConfig cfg;
    cfg.lr = 1e-2f;
    Adam opt({&p}, cfg);
    for (int i = 0; i < 2000; ++i) {
        p.zero_grad();
        for (int j = 0; j < 2; ++j)
            p.grad.data[static_cast<size_t>(j)] =
                p.value.data[static_cast<size_t>(j)] - target[static_cast<size_t>(j)];
        opt.step();
    }
    for (int j = 0; j < 2; ++j)
        CHECK(std::abs(p.value.data[static_cast<size_t>(j)] - target[static_cast<size_t>(j)]) < 1e-2f);
}

TEST_CASE("adam: non-finite gradient raises with step index") {
    Parameter p("p", Tensor::scalar(1.0f));
    Adam opt({&p}, {});
    p.grad.data[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(opt.step(), TrainingDiverged);
    try {
        opt.step();
    } catch (const TrainingDiverged& e) {
        CHECK(std::string(e.what()).find("step 1") != std::string::npos);
    }
}

TEST_CASE("grad_check: reports near-zero for unused parameters") {
    Rng rng(14);
    Parameter used("used", testutil::random_tensor(rng, {3}));
    Parameter unused("unused", testutil::random_tensor(rng, {3}));
    auto build = [&](Tape& t) { return t.half_sum_squares(t.param(used)); };
    auto loss_value = [&]() {
        Tape t;
        return static_cast<double>(t.val(build(t)).data[0]);
    };
    auto compute = [&]() {
        Tape t;
        t.backward(build(t));
    };
    auto res = grad_check(loss_value, compute, {&unused});
    CHECK(res.max_rel_err < 1e-6);  // both analytic and numeric are ~0
}

TEST_CASE("forward is deterministic within a build") {
    Rng rng(15);
    TransformerBlockConfig cfg{8, 2, 0};
    TransformerBlock blk("blk", cfg, rng);
    Tensor x = testutil::random_tensor(rng, {5, 8});
    Tape t1, t2;
    Var y1 = blk.forward(t1, t1.input(x), false);
    Var y2 = blk.forward(t2, t2.input(x), false);
    CHECK(t1.val(y1).data == t2.val(y2).data);
}

TEST_CASE("checkpoint: bit-exact round trip") {
    Rng rng(16);
    NamedTensors nt;
    nt.put("layer.weight", testutil::random_tensor(rng, {7, 3}));
    nt.put("layer.bias", testutil::random_tensor(rng, {3}));
    nt.put_scalar("meta.version", 1.0f);
    auto bytes = encode_checkpoint(nt);
    NamedTensors back = decode_checkpoint(bytes);
    REQUIRE(back.items.size() == nt.items.size());
    for (size_t i = 0; i < nt.items.size(); ++i) {
        CHECK(back.items[i].first == nt.items[i].first);
        CHECK(back.items[i].second.shape == nt.items[i].second.shape);
        CHECK(back.items[i].second.data == nt.items[i].second.data);
    }
    CHECK(encode_checkpoint(back) == bytes);
}

TEST_CASE("checkpoint: bad magic and truncation are format errors") {
    Rng rng(17);
    NamedTensors nt;
    nt.put("w", testutil::random_tensor(rng, {4}));
    auto bytes = encode_checkpoint(nt);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
    auto trunc = bytes;
    trunc.resize(bytes.size() - 5);
    CHECK_THROWS_AS(decode_checkpoint(trunc), FormatError);
}

TEST_CASE("transformer block config validation") {
    TransformerBlockConfig bad{10, 3, 0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    TransformerBlockConfig ok{512, 16, 0};
    ok.validate();
    CHECK(ok.hidden() == 2048);
}

TEST_SUITE_END();
