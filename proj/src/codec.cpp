#include "maskr/codec.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace maskr::codec {

using EMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

SpectralFrames frames_of(const audio::AudioClip& clip, const CodecConfig& cfg) {
    auto spec = dsp::stft(clip, cfg.window, cfg.hop);
    return dsp::power_law_compress(dsp::magnitude(spec), cfg.power_exponent);
}

namespace {

// frames [T×F] -> centered latent [T×d]
std::vector<double> project_frames(const SpectralFrames& frames, const CodebookSet& cb) {
    int T = frames.frames, F = frames.bins, d = cb.cfg.latent_dim;
    if (F != cb.cfg.feature_dim())
        throw DimensionError("codec: frame feature dim " + std::to_string(F) +
                             " does not match codec " + std::to_string(cb.cfg.feature_dim()));
    std::vector<double> z(static_cast<size_t>(T) * d, 0.0);
    for (int t = 0; t < T; ++t) {
        const float* x = frames.data.data() + static_cast<size_t>(t) * F;
        double* zt = z.data() + static_cast<size_t>(t) * d;
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int f = 0; f < F; ++f)
                acc += (static_cast<double>(x[f]) - cb.mean.data[static_cast<size_t>(f)]) *
                       cb.proj_in.at2(f, j);
            zt[j] = acc;
        }
    }
    return z;
}

// exact nearest centroid in double precision, ties to the lowest id
int nearest_code(const double* r, const Tensor& codebook, int d) {
    int K = codebook.dim(0);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
        const float* c = codebook.data.data() + static_cast<size_t>(k) * d;
        double acc = 0.0;
        for (int j = 0; j < d; ++j) {
            double diff = r[j] - static_cast<double>(c[j]);
            acc += diff * diff;
        }
        if (acc < best_d) {
            best_d = acc;
            best = k;
        }
    }
    return best;
}

double norm2(const double* r, int d) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += r[j] * r[j];
    return std::sqrt(acc);
}

}  // namespace

Codegram rvq_encode_trace(const SpectralFrames& frames, const CodebookSet& cb,
                          std::vector<float>* stage_residual_norms) {
    cb.require_trained();
    int T = frames.frames, d = cb.cfg.latent_dim, C = cb.cfg.num_codebooks;
    std::vector<double> z = project_frames(frames, cb);
    Codegram cg(C, cb.cfg.codebook_size, T, cb.cfg.frame_rate());
    if (stage_residual_norms)
        stage_residual_norms->assign(static_cast<size_t>(T) * (C + 1), 0.0f);
    for (int t = 0; t < T; ++t) {
        double* r = z.data() + static_cast<size_t>(t) * d;
        if (stage_residual_norms)
            (*stage_residual_norms)[static_cast<size_t>(t) * (C + 1)] =
                static_cast<float>(norm2(r, d));
        for (int c = 0; c < C; ++c) {
            int k = nearest_code(r, cb.codebooks[static_cast<size_t>(c)], d);
            cg.at(c, t) = static_cast<uint16_t>(k);
            const float* cent =
                cb.codebooks[static_cast<size_t>(c)].data.data() + static_cast<size_t>(k) * d;
            for (int j = 0; j < d; ++j) r[j] -= static_cast<double>(cent[j]);
            if (stage_residual_norms)
                (*stage_residual_norms)[static_cast<size_t>(t) * (C + 1) + c + 1] =
                    static_cast<float>(norm2(r, d));
        }
    }
    return cg;
}

Codegram rvq_encode(const SpectralFrames& frames, const CodebookSet& cb) {
    return rvq_encode_trace(frames, cb, nullptr);
}

SpectralFrames rvq_decode_partial(const Codegram& cg, const CodebookSet& cb, int stages) {
    cb.require_trained();
    if (cg.num_codebooks > cb.cfg.num_codebooks || cg.codebook_size != cb.cfg.codebook_size)
        throw DimensionError("codec: codegram dims do not match codebooks");
    if (stages < 1 || stages > cg.num_codebooks)
        throw ConfigError("rvq_decode_partial: bad stage count");
    cg.validate_ids();
    int T = cg.frames, d = cb.cfg.latent_dim, F = cb.cfg.feature_dim();
    SpectralFrames out;
    out.window = cb.cfg.window;
    out.hop = cb.cfg.hop;
    out.sample_rate = cb.cfg.sample_rate;
    out.frames = T;
    out.bins = F;
    out.data.assign(static_cast<size_t>(T) * F, 0.0f);
    std::vector<double> z(static_cast<size_t>(d));
    for (int t = 0; t < T; ++t) {
        std::fill(z.begin(), z.end(), 0.0);
        for (int c = 0; c < stages; ++c) {
            const float* cent = cb.codebooks[static_cast<size_t>(c)].data.data() +
                                static_cast<size_t>(cg.at(c, t)) * d;
            for (int j = 0; j < d; ++j) z[static_cast<size_t>(j)] += cent[j];
        }
        float* x = out.data.data() + static_cast<size_t>(t) * F;
        for (int f = 0; f < F; ++f) {
            double acc = cb.mean.data[static_cast<size_t>(f)];
            for (int j = 0; j < d; ++j) acc += z[static_cast<size_t>(j)] * cb.proj_out.at2(j, f);
            x[f] = std::max(0.0f, static_cast<float>(acc));
        }
    }
    return out;
}

SpectralFrames rvq_decode(const Codegram& cg, const CodebookSet& cb) {
    return rvq_decode_partial(cg, cb, cg.num_codebooks);
}

CodebookSet train_codec(const std::vector<SpectralFrames>& corpus, const CodecConfig& cfg) {
    int F = cfg.feature_dim(), d = cfg.latent_dim, K = cfg.codebook_size, C = cfg.num_codebooks;
    if (d > F) throw ConfigError("codec: latent_dim must not exceed feature dim");
    int64_t N = 0;
    for (const auto& fr : corpus) {
        if (fr.bins != F) throw DimensionError("codec: corpus frame dims disagree with config");
        N += fr.frames;
    }
    if (N < cfg.required_frames())
        throw DataError("codec: corpus has " + std::to_string(N) + " frames, need at least " +
                        std::to_string(cfg.required_frames()));

    CodebookSet cb;
    cb.cfg = cfg;

    // stack corpus
    EMat X(N, F);
    int64_t row = 0;
    for (const auto& fr : corpus) {
        for (int t = 0; t < fr.frames; ++t, ++row)
            for (int f = 0; f < F; ++f) X(row, f) = fr.at(t, f);
    }

    // PCA basis: mean + top-d eigenvectors of the covariance
    Eigen::VectorXf mean = X.colwise().mean();
    EMat Xc = X.rowwise() - mean.transpose();
    Eigen::MatrixXf cov = (Xc.transpose() * Xc) / static_cast<float>(N);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXf> eig(cov);
    if (eig.info() != Eigen::Success) throw Error("codec: eigendecomposition failed");
    // eigenvalues ascending; take the top d columns in descending order
    cb.mean = Tensor::zeros({F});
    for (int f = 0; f < F; ++f) cb.mean.data[static_cast<size_t>(f)] = mean(f);
    cb.proj_in = Tensor::zeros({F, d});
    cb.proj_out = Tensor::zeros({d, F});
    for (int j = 0; j < d; ++j) {
        auto v = eig.eigenvectors().col(F - 1 - j);
        for (int f = 0; f < F; ++f) {
            cb.proj_in.at2(f, j) = v(f);
            cb.proj_out.at2(j, f) = v(f);  // orthonormal basis: least-squares inverse
        }
    }

    // latent corpus
    EMat Z = Xc * ECMap(cb.proj_in.data.data(), F, d);

    Rng rng(cfg.seed);
    EMat R = Z;  // residuals for the current stage
    for (int c = 0; c < C; ++c) {
        bool pin_zero = c > 0;
        EMat cents(K, d);
        for (int k = 0; k < K; ++k) {
            if (pin_zero && k == 0) {
                cents.row(k).setZero();
                continue;
            }
            int64_t pick = rng.uniform_int(0, N - 1);
            cents.row(k) = R.row(pick);
        }
        Eigen::VectorXf ema_count = Eigen::VectorXf::Zero(K);
        EMat ema_sum = EMat::Zero(K, d);
        std::vector<int> assign(static_cast<size_t>(N));
        Eigen::VectorXf cnorm(K);

        for (int epoch = 0; epoch < cfg.kmeans_epochs; ++epoch) {
            for (int k = 0; k < K; ++k) cnorm(k) = cents.row(k).squaredNorm();
            // assignment via -2*R*C^T + |c|^2 (row norm constant per frame)
            EMat scores = R * cents.transpose();
            Eigen::VectorXf count = Eigen::VectorXf::Zero(K);
            EMat sum = EMat::Zero(K, d);
            for (int64_t i = 0; i < N; ++i) {
                int best = 0;
                float best_d = cnorm(0) - 2.0f * scores(i, 0);
                for (int k = 1; k < K; ++k) {
                    float dd = cnorm(k) - 2.0f * scores(i, k);
                    if (dd < best_d) {
                        best_d = dd;
                        best = k;
                    }
                }
                assign[static_cast<size_t>(i)] = best;
                count(best) += 1.0f;
                sum.row(best) += R.row(i);
            }
            float blend = epoch == 0 ? 1.0f : 1.0f - cfg.ema_decay;
            ema_count = (1.0f - blend) * ema_count + blend * count;
            ema_sum = (1.0f - blend) * ema_sum + blend * sum;
            for (int k = pin_zero ? 1 : 0; k < K; ++k)
                if (ema_count(k) > 1e-6f) cents.row(k) = ema_sum.row(k) / ema_count(k);

            // reseed dead codes (usage below 1e-3 of uniform) from random residuals
            float uniform_share = ema_count.sum() / static_cast<float>(K);
            for (int k = pin_zero ? 1 : 0; k < K; ++k) {
                if (ema_count(k) < 1e-3f * uniform_share) {
                    int64_t pick = rng.uniform_int(0, N - 1);
                    cents.row(k) = R.row(pick);
                    ema_count(k) = uniform_share * 0.01f;
                    ema_sum.row(k) = cents.row(k) * ema_count(k);
                }
            }
        }

        cb.codebooks.push_back(Tensor::zeros({K, d}));
        Tensor& stored = cb.codebooks.back();
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < d; ++j) stored.at2(k, j) = cents(k, j);
        cb.ema_counts.emplace_back(ema_count.data(), ema_count.data() + K);

        // pass residuals to the next stage (final assignment with the stored book)
        if (c + 1 < C) {
            for (int k = 0; k < K; ++k) cnorm(k) = cents.row(k).squaredNorm();
            EMat scores = R * cents.transpose();
            for (int64_t i = 0; i < N; ++i) {
                int best = 0;
                float best_d = cnorm(0) - 2.0f * scores(i, 0);
                for (int k = 1; k < K; ++k) {
                    float dd = cnorm(k) - 2.0f * scores(i, k);
                    if (dd < best_d) {
                        best_d = dd;
                        best = k;
                    }
                }
                R.row(i) -= cents.row(best);
            }
        }
    }
    cb.trained = true;
    return cb;
}

audio::AudioClip codec_synthesize(const Codegram& cg, const CodebookSet& cb, int gl_iters) {
    SpectralFrames compressed = rvq_decode(cg, cb);
    SpectralFrames mag = dsp::power_law_expand(compressed, cb.cfg.power_exponent);
    return dsp::griffin_lim(mag, gl_iters);
}

nn::NamedTensors codec_to_tensors(const CodebookSet& cb) {
    nn::NamedTensors nt;
    nt.put_scalar("codec.meta.num_codebooks", static_cast<float>(cb.cfg.num_codebooks));
    nt.put_scalar("codec.meta.codebook_size", static_cast<float>(cb.cfg.codebook_size));
    nt.put_scalar("codec.meta.latent_dim", static_cast<float>(cb.cfg.latent_dim));
    nt.put_scalar("codec.meta.window", static_cast<float>(cb.cfg.window));
    nt.put_scalar("codec.meta.hop", static_cast<float>(cb.cfg.hop));
    nt.put_scalar("codec.meta.sample_rate", static_cast<float>(cb.cfg.sample_rate));
    nt.put_scalar("codec.meta.power_exponent", cb.cfg.power_exponent);
    nt.put_scalar("codec.meta.trained", cb.trained ? 1.0f : 0.0f);
    nt.put("codec.mean", cb.mean);
    nt.put("codec.proj_in", cb.proj_in);
    nt.put("codec.proj_out", cb.proj_out);
    for (int c = 0; c < cb.cfg.num_codebooks; ++c) {
        nt.put("codec.codebook." + std::to_string(c), cb.codebooks[static_cast<size_t>(c)]);
        nn::Tensor counts = nn::Tensor::zeros({cb.cfg.codebook_size});
        counts.data = cb.ema_counts[static_cast<size_t>(c)];
        nt.put("codec.ema_counts." + std::to_string(c), std::move(counts));
    }
    return nt;
}

CodebookSet codec_from_tensors(const nn::NamedTensors& nt) {
    CodebookSet cb;
    cb.cfg.num_codebooks = static_cast<int>(nt.scalar("codec.meta.num_codebooks"));
    cb.cfg.codebook_size = static_cast<int>(nt.scalar("codec.meta.codebook_size"));
    cb.cfg.latent_dim = static_cast<int>(nt.scalar("codec.meta.latent_dim"));
    cb.cfg.window = static_cast<int>(nt.scalar("codec.meta.window"));
    cb.cfg.hop = static_cast<int>(nt.scalar("codec.meta.hop"));
    cb.cfg.sample_rate = static_cast<int>(nt.scalar("codec.meta.sample_rate"));
    cb.cfg.power_exponent = nt.scalar("codec.meta.power_exponent");
    cb.trained = nt.scalar("codec.meta.trained") != 0.0f;
    cb.mean = nt.require("codec.mean");
    cb.proj_in = nt.require("codec.proj_in");
    cb.proj_out = nt.require("codec.proj_out");
    for (int c = 0; c < cb.cfg.num_codebooks; ++c) {
        cb.codebooks.push_back(nt.require("codec.codebook." + std::to_string(c)));
        const Tensor& counts = nt.require("codec.ema_counts." + std::to_string(c));
        cb.ema_counts.emplace_back(counts.data.begin(), counts.data.end());
    }
    return cb;
}

void save_codec(const std::string& path, const CodebookSet& cb) {
    nn::save_checkpoint(path, codec_to_tensors(cb));
}

CodebookSet load_codec(const std::string& path) {
    return codec_from_tensors(nn::load_checkpoint(path));
}

}  // namespace maskr::codec
