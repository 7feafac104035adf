#pragma once

#include <string>
#include <vector>

#include "maskr/util.hpp"

namespace maskr::audio {

struct AudioClip {
    std::vector<float> samples;
    int sample_rate = 0;

    float duration_s() const {
        return sample_rate > 0 ? static_cast<float>(samples.size()) / sample_rate : 0.0f;
    }
    float peak() const;
    float rms() const;
};

// RIFF WAV. Reads mono/stereo PCM16 and IEEE float32; stereo is downmixed
// with a warning. Writes mono PCM16.
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

}  // namespace maskr::audio
