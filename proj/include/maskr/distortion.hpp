#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maskr/audio.hpp"

namespace maskr::distortion {

using audio::AudioClip;

enum class NoiseKind { white, pink };

struct CorruptionPolicy {
    float p_reverb = 0.5f;
    float p_noise = 0.5f;
    float p_bandwidth = 0.5f;
    float p_clip = 0.5f;
    float snr_min_db = -5.0f, snr_max_db = 20.0f;
    float clip_min = 0.1f, clip_max = 0.5f;
    float cutoff_min_hz = 1000.0f, cutoff_max_hz = 22050.0f;
    float rt60_min_s = 0.1f, rt60_max_s = 1.0f;
    NoiseKind noise = NoiseKind::white;

    // convenience presets
    static CorruptionPolicy none_but_noise();
    static CorruptionPolicy bandwidth_only();
    CorruptionPolicy clamped_to_rate(int sample_rate) const;
};

// The sampled parameters that produced one corrupted clip. Reapplying a
// recipe to the same clean input reproduces the output bit-exactly.
struct CorruptionRecipe {
    uint64_t seed = 0;
    std::optional<float> rt60_s;
    std::optional<float> snr_db;
    std::optional<float> cutoff_hz;
    std::optional<float> clip_level;
    NoiseKind noise = NoiseKind::white;
    float mix_rescale = 1.0f;    // gain applied after noise mixing to keep peak <= 0.99
    float final_rescale = 1.0f;  // safety gain applied at the end of the chain

    std::string to_json_line() const;
    static CorruptionRecipe from_json_line(const std::string& line);
};

struct MixResult {
    AudioClip clip;
    float noise_gain = 0.0f;
    float rescale = 1.0f;
};

MixResult mix_noise_at_snr(const AudioClip& clean, const AudioClip& noise, float snr_db);

std::vector<float> synth_rir(float rt60_s, int sample_rate, uint64_t seed);

AudioClip apply_reverb(const AudioClip& clean, const std::vector<float>& rir);

AudioClip clip_signal(const AudioClip& clean, float clip_level);

AudioClip limit_bandwidth(const AudioClip& clean, float cutoff_hz);

AudioClip synth_noise(size_t length, int sample_rate, NoiseKind kind, uint64_t seed);

// Applies the enabled distortions in the order reverb -> noise -> bandwidth
// -> clipping; updates the recipe's rescale fields.
AudioClip apply_recipe(const AudioClip& clean, CorruptionRecipe& recipe);

std::pair<AudioClip, CorruptionRecipe> corrupt(const AudioClip& clean,
                                               const CorruptionPolicy& policy, uint64_t seed);

// parameter sampling without application (used by range tests)
CorruptionRecipe sample_recipe(const CorruptionPolicy& policy, uint64_t seed);

}  // namespace maskr::distortion
