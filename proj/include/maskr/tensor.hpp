#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "maskr/util.hpp"

namespace maskr::nn {

using Shape = std::vector<int>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// Dense row-major float32 tensor. Gradients live next to values only on
// Parameter; intermediate grads are managed by the tape.
struct Tensor {
    Shape shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(Shape s, std::vector<float> d);

    static Tensor zeros(Shape s);
    static Tensor full(Shape s, float v);
    static Tensor scalar(float v) { return Tensor({1}, {v}); }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    bool empty() const { return data.empty(); }

    float& at2(int r, int c) { return data[static_cast<size_t>(r) * dim(1) + c]; }
    float at2(int r, int c) const { return data[static_cast<size_t>(r) * dim(1) + c]; }
    float& at3(int b, int r, int c) {
        return data[(static_cast<size_t>(b) * dim(1) + r) * dim(2) + c];
    }
    float at3(int b, int r, int c) const {
        return data[(static_cast<size_t>(b) * dim(1) + r) * dim(2) + c];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// ---- value-level kernels (shared by tape forward/backward and inference) ----

// C = A[m×k] · B[k×n]
Tensor matmul(const Tensor& a, const Tensor& b);
// C += A · B^T and C += A^T · B accumulating variants used by backward
void add_matmul_nt(Tensor& out, const Tensor& a, const Tensor& b);
void add_matmul_tn(Tensor& out, const Tensor& a, const Tensor& b);
void add_matmul(Tensor& out, const Tensor& a, const Tensor& b);

void add_inplace(Tensor& a, const Tensor& b);
void scale_inplace(Tensor& a, float s);

// softmax over contiguous rows of length n; when limit != nullptr row r uses
// only the first limit[r] entries and zeroes the rest (causal masking).
void softmax_rows(float* data, int rows, int n, const int* limits);

float gelu_scalar(float x);
float gelu_grad_scalar(float x);

// per-row layer norm over last dim; writes mean/rstd (length rows) for backward
void layer_norm_rows(const float* x, float* y, int rows, int d,
                     const float* gamma, const float* beta, float eps,
                     float* mean, float* rstd);

Tensor sinusoidal_positions(int frames, int dim);

bool all_finite(const Tensor& t);

}  // namespace maskr::nn
