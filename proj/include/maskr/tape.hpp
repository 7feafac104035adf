#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "maskr/tensor.hpp"

namespace maskr::nn {

// A named trainable tensor. grad has the same shape as value and is
// accumulated across samples until the optimizer consumes it.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape)) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0f); }
};

struct Var {
    int32_t id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape. One tape per forward pass; ops append nodes, backward()
// walks them in reverse creation order. Not thread-safe by design.
class Tape {
public:
    Var input(Tensor v);
    Var param(Parameter& p);

    Var add(Var a, Var b);
    // x[R×n] + bias[n] broadcast over rows
    Var add_bias(Var x, Var bias);
    // v[d] tiled to rows[R×d]
    Var repeat_row(Var v, int rows);
    Var matmul(Var a, Var b);
    // batched matmul over leading dim
    Var bmm(Var a, Var b);
    Var transpose_last(Var a);
    Var reshape(Var a, Shape s);
    // x[T×d] -> [H×T×d/H]
    Var split_heads(Var x, int heads);
    // x[H×T×dh] -> [T×H·dh]
    Var merge_heads(Var x);
    Var scale(Var a, float s);
    // softmax over the last dim; causal restricts row r of each square
    // [T×T] block to its first r+1 entries
    Var softmax_last(Var a, bool causal);
    Var gelu(Var a);
    Var relu(Var a);
    Var layer_norm(Var x, Var gamma, Var beta, float eps);
    // rows of table selected by ids -> [len(ids) × d]
    Var embedding(Var table, std::span<const int> ids);
    Var gather_rows(Var x, std::vector<int> rows);
    // Sum over masked rows of -log softmax(logits[row])[target[row]].
    // Unmasked rows contribute nothing and receive exactly zero gradient.
    Var cross_entropy_masked_sum(Var logits, std::span<const int> targets,
                                 std::span<const uint8_t> mask, int* masked_count = nullptr);
    Var add_many(const std::vector<Var>& vs);
    // 0.5 * sum(a^2) -> scalar; generic reduction head for gradient checks
    Var half_sum_squares(Var a);

    void backward(Var root);

    // Scalar reductions also record their double-precision value; composed
    // scalar ops (scale/add) propagate it. Falls back to the f32 value.
    double scalar_double(Var v) const;

    const Tensor& val(Var v) const { return nodes_[static_cast<size_t>(v.id)].value; }
    const Tensor& grad(Var v) const;
    bool requires_grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].needs_grad; }
    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // empty until touched
        bool needs_grad = false;
        Parameter* param = nullptr;
        std::function<void(Tape&)> back;
    };

    std::vector<Node> nodes_;
    std::vector<std::pair<int32_t, double>> scalar_doubles_;
    size_t cursor_ = 0;  // node whose backward fn is currently running

    void note_double(Var v, double x) { scalar_doubles_.emplace_back(v.id, x); }
    bool find_double(Var v, double* out) const;

    Var push(Tensor value, bool needs_grad, std::function<void(Tape&)> back);
    Tensor& grad_buf(int32_t id);
    bool has_grad(int32_t id) const { return !nodes_[static_cast<size_t>(id)].grad.empty(); }
    friend struct TapeTestAccess;
};

}  // namespace maskr::nn
