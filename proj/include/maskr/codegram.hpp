#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskr/util.hpp"

namespace maskr::codec {

// C×T grid of discrete token ids, one row per residual codebook.
// File format ("CGRM"): magic, u8 version=1, u16 C, u16 K, u32 T,
// f32 frame_rate_hz, then C*T little-endian u16 ids, codebook-major.
struct Codegram {
    int num_codebooks = 0;
    int codebook_size = 0;
    int frames = 0;
    float frame_rate = 0.0f;
    std::vector<uint16_t> tokens;  // C×T codebook-major

    Codegram() = default;
    Codegram(int c, int k, int t, float rate)
        : num_codebooks(c), codebook_size(k), frames(t), frame_rate(rate),
          tokens(static_cast<size_t>(c) * t, 0) {}

    uint16_t& at(int c, int t) { return tokens[static_cast<size_t>(c) * frames + t]; }
    uint16_t at(int c, int t) const { return tokens[static_cast<size_t>(c) * frames + t]; }

    void validate_ids() const;
    bool same_dims(const Codegram& o) const {
        return num_codebooks == o.num_codebooks && codebook_size == o.codebook_size &&
               frames == o.frames;
    }
};

std::vector<uint8_t> encode_codegram(const Codegram& cg);
Codegram decode_codegram(const std::vector<uint8_t>& bytes);
void save_codegram(const std::string& path, const Codegram& cg);
Codegram load_codegram(const std::string& path);

}  // namespace maskr::codec
