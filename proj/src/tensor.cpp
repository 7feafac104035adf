#include "maskr/tensor.hpp"

#include <Eigen/Core>

#include <cmath>
#include <sstream>

namespace maskr::nn {

using EMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

Tensor::Tensor(Shape s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
        throw_dim("tensor data size does not match shape " + shape_str(shape));
}

Tensor Tensor::zeros(Shape s) {
    Tensor t;
    int64_t n = shape_numel(s);
    t.shape = std::move(s);
    t.data.assign(static_cast<size_t>(n), 0.0f);
    return t;
}

Tensor Tensor::full(Shape s, float v) {
    Tensor t = zeros(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
}

static void check_mm(const Tensor& a, const Tensor& b, bool ta, bool tb) {
    if (a.rank() != 2 || b.rank() != 2) throw_dim("matmul expects rank-2 tensors");
    int ak = ta ? a.dim(0) : a.dim(1);
    int bk = tb ? b.dim(1) : b.dim(0);
    if (ak != bk)
        throw_dim("matmul inner dims disagree: " + shape_str(a.shape) + " vs " + shape_str(b.shape));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_mm(a, b, false, false);
    Tensor out = Tensor::zeros({a.dim(0), b.dim(1)});
    EMap(out.data.data(), a.dim(0), b.dim(1)).noalias() =
        ECMap(a.data.data(), a.dim(0), a.dim(1)) * ECMap(b.data.data(), b.dim(0), b.dim(1));
    return out;
}

void add_matmul(Tensor& out, const Tensor& a, const Tensor& b) {
    check_mm(a, b, false, false);
    EMap(out.data.data(), a.dim(0), b.dim(1)).noalias() +=
        ECMap(a.data.data(), a.dim(0), a.dim(1)) * ECMap(b.data.data(), b.dim(0), b.dim(1));
}

void add_matmul_nt(Tensor& out, const Tensor& a, const Tensor& b) {
    check_mm(a, b, false, true);
    EMap(out.data.data(), a.dim(0), b.dim(0)).noalias() +=
        ECMap(a.data.data(), a.dim(0), a.dim(1)) *
        ECMap(b.data.data(), b.dim(0), b.dim(1)).transpose();
}

void add_matmul_tn(Tensor& out, const Tensor& a, const Tensor& b) {
    check_mm(a, b, true, false);
    EMap(out.data.data(), a.dim(1), b.dim(1)).noalias() =
        EMap(out.data.data(), a.dim(1), b.dim(1)) +
        ECMap(a.data.data(), a.dim(0), a.dim(1)).transpose() *
            ECMap(b.data.data(), b.dim(0), b.dim(1));
}

void add_inplace(Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw_dim("add: shape mismatch");
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void scale_inplace(Tensor& a, float s) {
    for (float& v : a.data) v *= s;
}

void softmax_rows(float* data, int rows, int n, const int* limits) {
    for (int r = 0; r < rows; ++r) {
        float* row = data + static_cast<size_t>(r) * n;
        int lim = limits ? limits[r] : n;
        float mx = row[0];
        for (int i = 1; i < lim; ++i) mx = std::max(mx, row[i]);
        double sum = 0.0;
        for (int i = 0; i < lim; ++i) {
            row[i] = std::exp(row[i] - mx);
            sum += row[i];
        }
        float inv = static_cast<float>(1.0 / sum);
        for (int i = 0; i < lim; ++i) row[i] *= inv;
        for (int i = lim; i < n; ++i) row[i] = 0.0f;
    }
}

float gelu_scalar(float x) {
    return 0.5f * x * (1.0f + std::erf(x * 0.70710678118654752440f));
}

float gelu_grad_scalar(float x) {
    float cdf = 0.5f * (1.0f + std::erf(x * 0.70710678118654752440f));
    float pdf = 0.3989422804014327f * std::exp(-0.5f * x * x);
    return cdf + x * pdf;
}

void layer_norm_rows(const float* x, float* y, int rows, int d,
                     const float* gamma, const float* beta, float eps,
                     float* mean, float* rstd) {
    for (int r = 0; r < rows; ++r) {
        const float* xr = x + static_cast<size_t>(r) * d;
        float* yr = y + static_cast<size_t>(r) * d;
        double mu = 0.0;
        for (int i = 0; i < d; ++i) mu += xr[i];
        mu /= d;
        double var = 0.0;
        for (int i = 0; i < d; ++i) {
            double c = xr[i] - mu;
            var += c * c;
        }
        var /= d;
        float rs = static_cast<float>(1.0 / std::sqrt(var + eps));
        float m = static_cast<float>(mu);
        if (mean) mean[r] = m;
        if (rstd) rstd[r] = rs;
        for (int i = 0; i < d; ++i) yr[i] = (xr[i] - m) * rs * gamma[i] + beta[i];
    }
}

Tensor sinusoidal_positions(int frames, int dim) {
    Tensor pe = Tensor::zeros({frames, dim});
    for (int t = 0; t < frames; ++t) {
        for (int i = 0; i < dim; i += 2) {
            double freq = std::pow(10000.0, -static_cast<double>(i) / dim);
            double ang = t * freq;
            pe.at2(t, i) = static_cast<float>(std::sin(ang));
            if (i + 1 < dim) pe.at2(t, i + 1) = static_cast<float>(std::cos(ang));
        }
    }
    return pe;
}

bool all_finite(const Tensor& t) {
    for (float v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace maskr::nn
