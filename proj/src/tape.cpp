#include "maskr/tape.hpp"

#include <Eigen/Core>

#include <cmath>
#include <memory>

namespace maskr::nn {

using EMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

Var Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&)> back) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.back = needs_grad ? std::move(back) : nullptr;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_buf(int32_t id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape);
    return n.grad;
}

const Tensor& Tape::grad(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v.id)];
    if (n.grad.empty()) throw Error("grad unavailable: backward not run or unreachable node");
    return n.grad;
}

Var Tape::input(Tensor v) { return push(std::move(v), false, nullptr); }

Var Tape::param(Parameter& p) {
    Var out = push(p.value, true, nullptr);
    Node& n = nodes_.back();
    n.param = &p;
    int32_t id = out.id;
    n.back = [id](Tape& t) {
        Node& self = t.nodes_[static_cast<size_t>(id)];
        if (!self.grad.empty()) add_inplace(self.param->grad, self.grad);
    };
    return out;
}

bool Tape::find_double(Var v, double* out) const {
    for (auto it = scalar_doubles_.rbegin(); it != scalar_doubles_.rend(); ++it)
        if (it->first == v.id) {
            *out = it->second;
            return true;
        }
    return false;
}

double Tape::scalar_double(Var v) const {
    double x;
    if (find_double(v, &x)) return x;
    return static_cast<double>(val(v).data[0]);
}

Var Tape::add(Var a, Var b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (!ta.same_shape(tb)) throw_dim("add: " + shape_str(ta.shape) + " vs " + shape_str(tb.shape));
    Tensor out = ta;
    add_inplace(out, tb);
    bool ng = requires_grad(a) || requires_grad(b);
    int32_t ia = a.id, ib = b.id;
    Var res = push(std::move(out), ng, [ia, ib](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        if (t.nodes_[static_cast<size_t>(ia)].needs_grad) add_inplace(t.grad_buf(ia), g);
        if (t.nodes_[static_cast<size_t>(ib)].needs_grad) add_inplace(t.grad_buf(ib), g);
    });
    double da, db;
    if (val(res).numel() == 1 && find_double(a, &da) && find_double(b, &db))
        note_double(res, da + db);
    return res;
}

Var Tape::add_bias(Var x, Var bias) {
    const Tensor& tx = val(x);
    const Tensor& tb = val(bias);
    if (tx.rank() != 2 || tb.rank() != 1 || tx.dim(1) != tb.dim(0))
        throw_dim("add_bias: " + shape_str(tx.shape) + " + " + shape_str(tb.shape));
    Tensor out = tx;
    int rows = tx.dim(0), n = tx.dim(1);
    for (int r = 0; r < rows; ++r)
        for (int i = 0; i < n; ++i) out.at2(r, i) += tb.data[static_cast<size_t>(i)];
    bool ng = requires_grad(x) || requires_grad(bias);
    int32_t ix = x.id, ib = bias.id;
    return push(std::move(out), ng, [ix, ib, rows, n](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        if (t.nodes_[static_cast<size_t>(ix)].needs_grad) add_inplace(t.grad_buf(ix), g);
        if (t.nodes_[static_cast<size_t>(ib)].needs_grad) {
            Tensor& gb = t.grad_buf(ib);
            for (int r = 0; r < rows; ++r)
                for (int i = 0; i < n; ++i)
                    gb.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(r) * n + i];
        }
    });
}

Var Tape::repeat_row(Var v, int rows) {
    const Tensor& tv = val(v);
    if (tv.rank() != 1) throw_dim("repeat_row expects a vector");
    int d = tv.dim(0);
    Tensor out = Tensor::zeros({rows, d});
    for (int r = 0; r < rows; ++r)
        std::copy(tv.data.begin(), tv.data.end(), out.data.begin() + static_cast<size_t>(r) * d);
    int32_t iv = v.id;
    return push(std::move(out), requires_grad(v), [iv, rows, d](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        Tensor& gv = t.grad_buf(iv);
        for (int r = 0; r < rows; ++r)
            for (int i = 0; i < d; ++i)
                gv.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(r) * d + i];
    });
}

Var Tape::matmul(Var a, Var b) {
    Tensor out = nn::matmul(val(a), val(b));
    bool ng = requires_grad(a) || requires_grad(b);
    int32_t ia = a.id, ib = b.id;
    return push(std::move(out), ng, [ia, ib](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        const Tensor& va = t.nodes_[static_cast<size_t>(ia)].value;
        const Tensor& vb = t.nodes_[static_cast<size_t>(ib)].value;
        if (t.nodes_[static_cast<size_t>(ia)].needs_grad) add_matmul_nt(t.grad_buf(ia), g, vb);
        if (t.nodes_[static_cast<size_t>(ib)].needs_grad) add_matmul_tn(t.grad_buf(ib), va, g);
    });
}

static void bmm_check(const Tensor& a, const Tensor& b) {
    if (a.rank() != 3 || b.rank() != 3 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1))
        throw_dim("bmm: " + shape_str(a.shape) + " vs " + shape_str(b.shape));
}

Var Tape::bmm(Var a, Var b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    bmm_check(ta, tb);
    int B = ta.dim(0), m = ta.dim(1), k = ta.dim(2), n = tb.dim(2);
    Tensor out = Tensor::zeros({B, m, n});
    for (int s = 0; s < B; ++s) {
        ECMap ma(ta.data.data() + static_cast<size_t>(s) * m * k, m, k);
        ECMap mb(tb.data.data() + static_cast<size_t>(s) * k * n, k, n);
        EMap(out.data.data() + static_cast<size_t>(s) * m * n, m, n).noalias() = ma * mb;
    }
    bool ng = requires_grad(a) || requires_grad(b);
    int32_t ia = a.id, ib = b.id;
    return push(std::move(out), ng, [ia, ib, B, m, k, n](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        const Tensor& va = t.nodes_[static_cast<size_t>(ia)].value;
        const Tensor& vb = t.nodes_[static_cast<size_t>(ib)].value;
        for (int s = 0; s < B; ++s) {
            ECMap gm(g.data.data() + static_cast<size_t>(s) * m * n, m, n);
            ECMap ma(va.data.data() + static_cast<size_t>(s) * m * k, m, k);
            ECMap mb(vb.data.data() + static_cast<size_t>(s) * k * n, k, n);
            if (t.nodes_[static_cast<size_t>(ia)].needs_grad) {
                EMap ga(t.grad_buf(ia).data.data() + static_cast<size_t>(s) * m * k, m, k);
                ga.noalias() += gm * mb.transpose();
            }
            if (t.nodes_[static_cast<size_t>(ib)].needs_grad) {
                EMap gb(t.grad_buf(ib).data.data() + static_cast<size_t>(s) * k * n, k, n);
                gb.noalias() += ma.transpose() * gm;
            }
        }
    });
}

static Tensor transpose_last_value(const Tensor& a) {
    if (a.rank() == 2) {
        Tensor out = Tensor::zeros({a.dim(1), a.dim(0)});
        for (int r = 0; r < a.dim(0); ++r)
            for (int c = 0; c < a.dim(1); ++c) out.at2(c, r) = a.at2(r, c);
        return out;
    }
    if (a.rank() == 3) {
        int B = a.dim(0), m = a.dim(1), n = a.dim(2);
        Tensor out = Tensor::zeros({B, n, m});
        for (int s = 0; s < B; ++s)
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < n; ++c)
                    out.data[(static_cast<size_t>(s) * n + c) * m + r] =
                        a.data[(static_cast<size_t>(s) * m + r) * n + c];
        return out;
    }
    throw_dim("transpose_last expects rank 2 or 3");
}

Var Tape::transpose_last(Var a) {
    Tensor out = transpose_last_value(val(a));
    int32_t ia = a.id;
    return push(std::move(out), requires_grad(a), [ia](Tape& t) {
        Tensor gt = transpose_last_value(t.nodes_[t.cursor_].grad);
        add_inplace(t.grad_buf(ia), gt);
    });
}

Var Tape::reshape(Var a, Shape s) {
    const Tensor& ta = val(a);
    if (shape_numel(s) != ta.numel()) throw_dim("reshape: element count mismatch");
    Tensor out(std::move(s), ta.data);
    int32_t ia = a.id;
    return push(std::move(out), requires_grad(a), [ia](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        Tensor& ga = t.grad_buf(ia);
        for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += g.data[i];
    });
}

Var Tape::split_heads(Var x, int heads) {
    const Tensor& tx = val(x);
    if (tx.rank() != 2 || tx.dim(1) % heads != 0) throw_dim("split_heads: bad shape");
    int T = tx.dim(0), d = tx.dim(1), dh = d / heads;
    Tensor out = Tensor::zeros({heads, T, dh});
    for (int h = 0; h < heads; ++h)
        for (int t = 0; t < T; ++t)
            for (int i = 0; i < dh; ++i)
                out.data[(static_cast<size_t>(h) * T + t) * dh + i] = tx.at2(t, h * dh + i);
    int32_t ix = x.id;
    return push(std::move(out), requires_grad(x), [ix, heads, T, dh](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        Tensor& gx = t.grad_buf(ix);
        int d = heads * dh;
        for (int h = 0; h < heads; ++h)
            for (int r = 0; r < T; ++r)
                for (int i = 0; i < dh; ++i)
                    gx.data[static_cast<size_t>(r) * d + h * dh + i] +=
                        g.data[(static_cast<size_t>(h) * T + r) * dh + i];
    });
}

Var Tape::merge_heads(Var x) {
    const Tensor& tx = val(x);
    if (tx.rank() != 3) throw_dim("merge_heads expects rank-3");
    int heads = tx.dim(0), T = tx.dim(1), dh = tx.dim(2), d = heads * dh;
    Tensor out = Tensor::zeros({T, d});
    for (int h = 0; h < heads; ++h)
        for (int t = 0; t < T; ++t)
            for (int i = 0; i < dh; ++i)
                out.at2(t, h * dh + i) = tx.data[(static_cast<size_t>(h) * T + t) * dh + i];
    int32_t ix = x.id;
    return push(std::move(out), requires_grad(x), [ix, heads, T, dh](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        Tensor& gx = t.grad_buf(ix);
        int d = heads * dh;
        for (int h = 0; h < heads; ++h)
            for (int r = 0; r < T; ++r)
                for (int i = 0; i < dh; ++i)
                    gx.data[(static_cast<size_t>(h) * T + r) * dh + i] +=
                        g.data[static_cast<size_t>(r) * d + h * dh + i];
    });
}

Var Tape::scale(Var a, float s) {
    Tensor out = val(a);
    scale_inplace(out, s);
    int32_t ia = a.id;
    Var res = push(std::move(out), requires_grad(a), [ia, s](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        Tensor& ga = t.grad_buf(ia);
        for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += s * g.data[i];
    });
    double da;
    if (val(res).numel() == 1 && find_double(a, &da)) note_double(res, da * s);
    return res;
}

Var Tape::softmax_last(Var a, bool causal) {
    const Tensor& ta = val(a);
    if (ta.rank() < 2) throw_dim("softmax_last expects rank >= 2");
    int n = ta.dim(ta.rank() - 1);
    int rows = static_cast<int>(ta.numel() / n);
    Tensor out = ta;
    std::vector<int> limits;
    if (causal) {
        // rows cycle through [T×n] blocks; causal only makes sense when the
        // second-to-last dim equals the last
        int T = ta.dim(ta.rank() - 2);
        if (T != n) throw_dim("causal softmax expects square trailing dims");
        limits.resize(static_cast<size_t>(rows));
        for (int r = 0; r < rows; ++r) limits[static_cast<size_t>(r)] = (r % T) + 1;
    }
    softmax_rows(out.data.data(), rows, n, causal ? limits.data() : nullptr);
    int32_t ia = a.id;
    return push(std::move(out), requires_grad(a), [ia, rows, n](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        const Tensor& y = t.nodes_[t.cursor_].value;
        Tensor& ga = t.grad_buf(ia);
        for (int r = 0; r < rows; ++r) {
            const float* yr = y.data.data() + static_cast<size_t>(r) * n;
            const float* gr = g.data.data() + static_cast<size_t>(r) * n;
            float* out_r = ga.data.data() + static_cast<size_t>(r) * n;
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += static_cast<double>(gr[i]) * yr[i];
            for (int i = 0; i < n; ++i)
                out_r[i] += yr[i] * (gr[i] - static_cast<float>(dot));
        }
    });
}

Var Tape::gelu(Var a) {
    Tensor out = val(a);
    for (float& v : out.data) v = gelu_scalar(v);
    int32_t ia = a.id;
    return push(std::move(out), requires_grad(a), [ia](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        const Tensor& x = t.nodes_[static_cast<size_t>(ia)].value;
        Tensor& ga = t.grad_buf(ia);
        for (size_t i = 0; i < ga.data.size(); ++i)
            ga.data[i] += g.data[i] * gelu_grad_scalar(x.data[i]);
    });
}

Var Tape::relu(Var a) {
    Tensor out = val(a);
    for (float& v : out.data) v = v > 0.0f ? v : 0.0f;
    int32_t ia = a.id;
    return push(std::move(out), requires_grad(a), [ia](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        const Tensor& x = t.nodes_[static_cast<size_t>(ia)].value;
        Tensor& ga = t.grad_buf(ia);
        for (size_t i = 0; i < ga.data.size(); ++i)
            if (x.data[i] > 0.0f) ga.data[i] += g.data[i];
    });
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, float eps) {
    const Tensor& tx = val(x);
    const Tensor& tg = val(gamma);
    const Tensor& tb = val(beta);
    int d = tx.dim(tx.rank() - 1);
    if (d == 0) throw ConfigError("layer_norm: normalized dim must be positive");
    if (tg.rank() != 1 || tg.dim(0) != d || !tg.same_shape(tb))
        throw_dim("layer_norm: gamma/beta must be [d]");
    int rows = static_cast<int>(tx.numel() / d);
    Tensor out = Tensor::zeros(tx.shape);
    auto mean = std::make_shared<std::vector<float>>(static_cast<size_t>(rows));
    auto rstd = std::make_shared<std::vector<float>>(static_cast<size_t>(rows));
    layer_norm_rows(tx.data.data(), out.data.data(), rows, d, tg.data.data(), tb.data.data(),
                    eps, mean->data(), rstd->data());
    bool ng = requires_grad(x) || requires_grad(gamma) || requires_grad(beta);
    int32_t ix = x.id, ig = gamma.id, ib = beta.id;
    return push(std::move(out), ng, [ix, ig, ib, rows, d, mean, rstd](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        const Tensor& xin = t.nodes_[static_cast<size_t>(ix)].value;
        const Tensor& gam = t.nodes_[static_cast<size_t>(ig)].value;
        bool need_x = t.nodes_[static_cast<size_t>(ix)].needs_grad;
        bool need_g = t.nodes_[static_cast<size_t>(ig)].needs_grad;
        bool need_b = t.nodes_[static_cast<size_t>(ib)].needs_grad;
        for (int r = 0; r < rows; ++r) {
            const float* xr = xin.data.data() + static_cast<size_t>(r) * d;
            const float* gr = g.data.data() + static_cast<size_t>(r) * d;
            float mu = (*mean)[static_cast<size_t>(r)];
            float rs = (*rstd)[static_cast<size_t>(r)];
            if (need_g) {
                Tensor& gg = t.grad_buf(ig);
                for (int i = 0; i < d; ++i)
                    gg.data[static_cast<size_t>(i)] += gr[i] * (xr[i] - mu) * rs;
            }
            if (need_b) {
                Tensor& gb = t.grad_buf(ib);
                for (int i = 0; i < d; ++i) gb.data[static_cast<size_t>(i)] += gr[i];
            }
            if (need_x) {
                Tensor& gx = t.grad_buf(ix);
                double sum_dh = 0.0, sum_dh_xhat = 0.0;
                for (int i = 0; i < d; ++i) {
                    float xhat = (xr[i] - mu) * rs;
                    float dh = gr[i] * gam.data[static_cast<size_t>(i)];
                    sum_dh += dh;
                    sum_dh_xhat += static_cast<double>(dh) * xhat;
                }
                float m_dh = static_cast<float>(sum_dh / d);
                float m_dhx = static_cast<float>(sum_dh_xhat / d);
                float* gxr = gx.data.data() + static_cast<size_t>(r) * d;
                for (int i = 0; i < d; ++i) {
                    float xhat = (xr[i] - mu) * rs;
                    float dh = gr[i] * gam.data[static_cast<size_t>(i)];
                    gxr[i] += rs * (dh - m_dh - xhat * m_dhx);
                }
            }
        }
    });
}

Var Tape::embedding(Var table, std::span<const int> ids) {
    const Tensor& tt = val(table);
    if (tt.rank() != 2) throw_dim("embedding table must be rank-2");
    int rows = tt.dim(0), d = tt.dim(1);
    int T = static_cast<int>(ids.size());
    Tensor out = Tensor::zeros({T, d});
    for (int t = 0; t < T; ++t) {
        int id = ids[static_cast<size_t>(t)];
        if (id < 0 || id >= rows)
            throw DataError("embedding id " + std::to_string(id) + " out of range [0, " +
                            std::to_string(rows) + ")");
        std::copy_n(tt.data.data() + static_cast<size_t>(id) * d, d,
                    out.data.data() + static_cast<size_t>(t) * d);
    }
    auto ids_copy = std::make_shared<std::vector<int>>(ids.begin(), ids.end());
    int32_t it = table.id;
    return push(std::move(out), requires_grad(table), [it, ids_copy, d](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        Tensor& gt = t.grad_buf(it);
        for (size_t r = 0; r < ids_copy->size(); ++r) {
            float* dst = gt.data.data() + static_cast<size_t>((*ids_copy)[r]) * d;
            const float* src = g.data.data() + r * d;
            for (int i = 0; i < d; ++i) dst[i] += src[i];
        }
    });
}

Var Tape::gather_rows(Var x, std::vector<int> rows) {
    const Tensor& tx = val(x);
    if (tx.rank() != 2) throw_dim("gather_rows expects rank-2");
    int d = tx.dim(1);
    Tensor out = Tensor::zeros({static_cast<int>(rows.size()), d});
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] < 0 || rows[r] >= tx.dim(0)) throw_dim("gather_rows: index out of range");
        std::copy_n(tx.data.data() + static_cast<size_t>(rows[r]) * d, d,
                    out.data.data() + r * d);
    }
    auto idx = std::make_shared<std::vector<int>>(std::move(rows));
    int32_t ix = x.id;
    return push(std::move(out), requires_grad(x), [ix, idx, d](Tape& t) {
        const Tensor& g = t.nodes_[t.cursor_].grad;
        Tensor& gx = t.grad_buf(ix);
        for (size_t r = 0; r < idx->size(); ++r) {
            float* dst = gx.data.data() + static_cast<size_t>((*idx)[r]) * d;
            const float* src = g.data.data() + r * d;
            for (int i = 0; i < d; ++i) dst[i] += src[i];
        }
    });
}

Var Tape::cross_entropy_masked_sum(Var logits, std::span<const int> targets,
                                   std::span<const uint8_t> mask, int* masked_count) {
    const Tensor& tl = val(logits);
    if (tl.rank() != 2) throw_dim("cross_entropy expects [T×K] logits");
    int T = tl.dim(0), K = tl.dim(1);
    if (static_cast<int>(targets.size()) != T || static_cast<int>(mask.size()) != T)
        throw_dim("cross_entropy: targets/mask length must equal T");
    // softmax probabilities cached for backward; log-sum-exp in double
    auto probs = std::make_shared<Tensor>(tl);
    double loss = 0.0;
    int count = 0;
    for (int t = 0; t < T; ++t) {
        float* row = probs->data.data() + static_cast<size_t>(t) * K;
        if (!mask[static_cast<size_t>(t)]) continue;
        int tgt = targets[static_cast<size_t>(t)];
        if (tgt < 0 || tgt >= K) throw DataError("cross_entropy: target id out of range");
        float mx = row[0];
        for (int i = 1; i < K; ++i) mx = std::max(mx, row[i]);
        double sum = 0.0;
        for (int i = 0; i < K; ++i) sum += std::exp(static_cast<double>(row[i]) - mx);
        double logp = static_cast<double>(row[tgt]) - mx - std::log(sum);
        loss -= logp;
        double inv = 1.0 / sum;
        for (int i = 0; i < K; ++i)
            row[i] = static_cast<float>(std::exp(static_cast<double>(row[i]) - mx) * inv);
        ++count;
    }
    if (count == 0) throw DataError("cross_entropy: empty mask (no masked positions)");
    if (masked_count) *masked_count = count;
    auto tgt_copy = std::make_shared<std::vector<int>>(targets.begin(), targets.end());
    auto mask_copy = std::make_shared<std::vector<uint8_t>>(mask.begin(), mask.end());
    int32_t il = logits.id;
    Var res = push(Tensor::scalar(static_cast<float>(loss)), requires_grad(logits),
                [il, probs, tgt_copy, mask_copy, T, K](Tape& t) {
                    float gscale = t.nodes_[t.cursor_].grad.data[0];
                    Tensor& gl = t.grad_buf(il);
                    for (int r = 0; r < T; ++r) {
                        if (!(*mask_copy)[static_cast<size_t>(r)]) continue;  // exact zero grad
                        const float* p = probs->data.data() + static_cast<size_t>(r) * K;
                        float* g = gl.data.data() + static_cast<size_t>(r) * K;
                        int tgt = (*tgt_copy)[static_cast<size_t>(r)];
                        for (int i = 0; i < K; ++i) g[i] += gscale * p[i];
                        g[tgt] -= gscale;
                    }
                });
    note_double(res, loss);
    return res;
}

Var Tape::add_many(const std::vector<Var>& vs) {
    if (vs.empty()) throw Error("add_many: empty list");
    Var acc = vs[0];
    for (size_t i = 1; i < vs.size(); ++i) acc = add(acc, vs[i]);
    return acc;
}

Var Tape::half_sum_squares(Var a) {
    const Tensor& ta = val(a);
    double acc = 0.0;
    for (float v : ta.data) acc += 0.5 * static_cast<double>(v) * v;
    int32_t ia = a.id;
    Var res = push(Tensor::scalar(static_cast<float>(acc)), requires_grad(a), [ia](Tape& t) {
        float gscale = t.nodes_[t.cursor_].grad.data[0];
        const Tensor& x = t.nodes_[static_cast<size_t>(ia)].value;
        Tensor& ga = t.grad_buf(ia);
        for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += gscale * x.data[i];
    });
    note_double(res, acc);
    return res;
}

void Tape::backward(Var root) {
    if (!root.valid()) throw Error("backward: invalid root");
    if (val(root).numel() != 1) throw Error("backward expects a scalar root");
    if (!requires_grad(root)) throw Error("backward: root does not depend on any parameter");
    grad_buf(root.id).data[0] = 1.0f;
    for (int32_t id = root.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (!n.needs_grad || n.grad.empty() || !n.back) continue;
        cursor_ = static_cast<size_t>(id);
        n.back(*this);
    }
}

}  // namespace maskr::nn
