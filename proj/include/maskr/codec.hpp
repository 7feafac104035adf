#pragma once

#include "maskr/checkpoint.hpp"
#include "maskr/codegram.hpp"
#include "maskr/dsp.hpp"
#include "maskr/tensor.hpp"

namespace maskr::codec {

using dsp::SpectralFrames;
using nn::Tensor;

struct CodecConfig {
    int num_codebooks = 4;
    int codebook_size = 256;
    int latent_dim = 64;
    int window = 1024;
    int hop = 256;
    int sample_rate = 16000;
    float power_exponent = 0.3f;
    int kmeans_epochs = 12;
    float ema_decay = 0.99f;
    int64_t min_frames = 0;  // 0 -> 2*codebook_size
    uint64_t seed = 1;

    int feature_dim() const { return window / 2 + 1; }
    float frame_rate() const { return static_cast<float>(sample_rate) / hop; }
    int64_t required_frames() const { return min_frames > 0 ? min_frames : 2LL * codebook_size; }
};

// Residual vector quantizer over power-law STFT frames. Frames are centered
// and projected to the latent space by a PCA basis; each stage quantizes the
// residual of the previous one. Residual stages pin code 0 to the zero
// vector so per-stage residual norms can never grow.
struct CodebookSet {
    CodecConfig cfg;
    bool trained = false;
    Tensor mean;      // F
    Tensor proj_in;   // F×d
    Tensor proj_out;  // d×F
    std::vector<Tensor> codebooks;          // C of K×d
    std::vector<std::vector<float>> ema_counts;  // C of K

    void require_trained() const {
        if (!trained) throw DataError("codec: codebooks are not trained");
    }
};

// stft -> magnitude -> power-law compression with the codec's framing
SpectralFrames frames_of(const audio::AudioClip& clip, const CodecConfig& cfg);

Codegram rvq_encode(const SpectralFrames& frames, const CodebookSet& cb);

// also reports per-frame residual L2 norms after each stage:
// norms[t*(C+1) + 0] is the pre-quantization norm, + (c+1) after stage c
Codegram rvq_encode_trace(const SpectralFrames& frames, const CodebookSet& cb,
                          std::vector<float>* stage_residual_norms);

SpectralFrames rvq_decode(const Codegram& cg, const CodebookSet& cb);
// decode using only the first `stages` codebooks
SpectralFrames rvq_decode_partial(const Codegram& cg, const CodebookSet& cb, int stages);

CodebookSet train_codec(const std::vector<SpectralFrames>& corpus, const CodecConfig& cfg);

audio::AudioClip codec_synthesize(const Codegram& cg, const CodebookSet& cb, int gl_iters = 32);

nn::NamedTensors codec_to_tensors(const CodebookSet& cb);
CodebookSet codec_from_tensors(const nn::NamedTensors& nt);
void save_codec(const std::string& path, const CodebookSet& cb);
CodebookSet load_codec(const std::string& path);

}  // namespace maskr::codec
