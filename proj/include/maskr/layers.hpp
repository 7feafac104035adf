#pragma once

#include "maskr/tape.hpp"

namespace maskr::nn {

struct TransformerBlockConfig {
    int model_dim = 0;
    int num_heads = 0;
    int mlp_hidden = 0;  // 0 -> 4*model_dim

    void validate() const;
    int hidden() const { return mlp_hidden > 0 ? mlp_hidden : 4 * model_dim; }
};

// fan-in scaled uniform init
Tensor init_uniform_fan_in(Rng& rng, int fan_in, Shape shape);
Tensor init_uniform_range(Rng& rng, float a, Shape shape);

struct LinearLayer {
    Parameter weight;  // in×out
    Parameter bias;    // out

    LinearLayer() = default;
    LinearLayer(const std::string& name, int in, int out, Rng& rng);

    Var forward(Tape& t, Var x) const;
    void collect(std::vector<Parameter*>& out);
    int64_t param_count() const { return weight.value.numel() + bias.value.numel(); }
};

struct LayerNormLayer {
    Parameter gamma;
    Parameter beta;
    float eps = 1e-5f;

    LayerNormLayer() = default;
    LayerNormLayer(const std::string& name, int dim);

    Var forward(Tape& t, Var x) const;
    void collect(std::vector<Parameter*>& out);
};

// Pre-norm transformer block: x + MHA(LN(x)), then h + MLP(LN(h)).
struct TransformerBlock {
    TransformerBlockConfig cfg;
    LinearLayer wq, wk, wv, wo, mlp_in, mlp_out;
    LayerNormLayer ln_attn, ln_mlp;

    TransformerBlock() = default;
    TransformerBlock(const std::string& name, TransformerBlockConfig cfg, Rng& rng);

    Var forward(Tape& t, Var x, bool causal) const;
    void collect(std::vector<Parameter*>& out);
    int64_t param_count() const;
};

// Standalone self-attention (value path used by TransformerBlock::forward).
Var multi_head_attention(Tape& t, Var x, const TransformerBlockConfig& cfg,
                         const LinearLayer& wq, const LinearLayer& wk,
                         const LinearLayer& wv, const LinearLayer& wo, bool causal);

}  // namespace maskr::nn
