#include "maskr/layers.hpp"

#include <cmath>

namespace maskr::nn {

void TransformerBlockConfig::validate() const {
    if (model_dim <= 0 || num_heads <= 0)
        throw ConfigError("transformer block: dims must be positive");
    if (model_dim % num_heads != 0)
        throw ConfigError("transformer block: model_dim must be divisible by num_heads");
}

Tensor init_uniform_fan_in(Rng& rng, int fan_in, Shape shape) {
    float a = std::sqrt(3.0f / static_cast<float>(fan_in));
    return init_uniform_range(rng, a, std::move(shape));
}

Tensor init_uniform_range(Rng& rng, float a, Shape shape) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (float& v : t.data) v = rng.uniform_float(-a, a);
    return t;
}

LinearLayer::LinearLayer(const std::string& name, int in, int out, Rng& rng)
    : weight(name + ".weight", init_uniform_fan_in(rng, in, {in, out})),
      bias(name + ".bias", Tensor::zeros({out})) {}

Var LinearLayer::forward(Tape& t, Var x) const {
    Var w = t.param(const_cast<Parameter&>(weight));
    Var b = t.param(const_cast<Parameter&>(bias));
    return t.add_bias(t.matmul(x, w), b);
}

void LinearLayer::collect(std::vector<Parameter*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

LayerNormLayer::LayerNormLayer(const std::string& name, int dim)
    : gamma(name + ".gamma", Tensor::full({dim}, 1.0f)),
      beta(name + ".beta", Tensor::zeros({dim})) {}

Var LayerNormLayer::forward(Tape& t, Var x) const {
    Var g = t.param(const_cast<Parameter&>(gamma));
    Var b = t.param(const_cast<Parameter&>(beta));
    return t.layer_norm(x, g, b, eps);
}

void LayerNormLayer::collect(std::vector<Parameter*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
}

TransformerBlock::TransformerBlock(const std::string& name, TransformerBlockConfig c, Rng& rng)
    : cfg(c),
      wq(name + ".attn.q", c.model_dim, c.model_dim, rng),
      wk(name + ".attn.k", c.model_dim, c.model_dim, rng),
      wv(name + ".attn.v", c.model_dim, c.model_dim, rng),
      wo(name + ".attn.o", c.model_dim, c.model_dim, rng),
      mlp_in(name + ".mlp.in", c.model_dim, c.hidden(), rng),
      mlp_out(name + ".mlp.out", c.hidden(), c.model_dim, rng),
      ln_attn(name + ".ln_attn", c.model_dim),
      ln_mlp(name + ".ln_mlp", c.model_dim) {
    cfg.validate();
}

Var multi_head_attention(Tape& t, Var x, const TransformerBlockConfig& cfg,
                         const LinearLayer& wq, const LinearLayer& wk,
                         const LinearLayer& wv, const LinearLayer& wo, bool causal) {
    cfg.validate();
    int dh = cfg.model_dim / cfg.num_heads;
    Var q = t.split_heads(wq.forward(t, x), cfg.num_heads);
    Var k = t.split_heads(wk.forward(t, x), cfg.num_heads);
    Var v = t.split_heads(wv.forward(t, x), cfg.num_heads);
    Var scores = t.scale(t.bmm(q, t.transpose_last(k)), 1.0f / std::sqrt(static_cast<float>(dh)));
    Var attn = t.softmax_last(scores, causal);
    Var ctx = t.merge_heads(t.bmm(attn, v));
    return wo.forward(t, ctx);
}

Var TransformerBlock::forward(Tape& t, Var x, bool causal) const {
    Var h = t.add(x, multi_head_attention(t, ln_attn.forward(t, x), cfg, wq, wk, wv, wo, causal));
    Var m = mlp_out.forward(t, t.gelu(mlp_in.forward(t, ln_mlp.forward(t, h))));
    return t.add(h, m);
}

void TransformerBlock::collect(std::vector<Parameter*>& out) {
    ln_attn.collect(out);
    wq.collect(out);
    wk.collect(out);
    wv.collect(out);
    wo.collect(out);
    ln_mlp.collect(out);
    mlp_in.collect(out);
    mlp_out.collect(out);
}

int64_t TransformerBlock::param_count() const {
    int64_t n = 0;
    n += wq.param_count() + wk.param_count() + wv.param_count() + wo.param_count();
    n += mlp_in.param_count() + mlp_out.param_count();
    n += ln_attn.gamma.value.numel() + ln_attn.beta.value.numel();
    n += ln_mlp.gamma.value.numel() + ln_mlp.beta.value.numel();
    return n;
}

}  // namespace maskr::nn
