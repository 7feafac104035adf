#pragma once

#include <complex>
#include <span>
#include <vector>

#include "maskr/audio.hpp"

namespace maskr::dsp {

using audio::AudioClip;

// T×F spectra with the framing that produced them. F == window/2 + 1,
// frames == ceil(len/hop) with reflect-centered framing.
struct ComplexSpectrum {
    int window = 0, hop = 0, sample_rate = 0;
    int frames = 0, bins = 0;
    std::vector<std::complex<float>> data;  // T×F row-major

    std::complex<float>& at(int t, int f) { return data[static_cast<size_t>(t) * bins + f]; }
    std::complex<float> at(int t, int f) const { return data[static_cast<size_t>(t) * bins + f]; }
};

struct SpectralFrames {
    int window = 0, hop = 0, sample_rate = 0;
    int frames = 0, bins = 0;
    std::vector<float> data;  // T×F row-major, nonnegative

    float& at(int t, int f) { return data[static_cast<size_t>(t) * bins + f]; }
    float at(int t, int f) const { return data[static_cast<size_t>(t) * bins + f]; }
};

bool is_power_of_two(int n);
int stft_frame_count(size_t len, int hop);

// in-place iterative radix-2 FFT; size must be a power of two
void fft(std::vector<std::complex<double>>& a, bool inverse);

std::vector<float> hann_window(int n);  // periodic

ComplexSpectrum stft(const AudioClip& clip, int window, int hop);
// weighted overlap-add inverse; returns exactly `length` samples
std::vector<float> istft(const ComplexSpectrum& spec, size_t length);

SpectralFrames magnitude(const ComplexSpectrum& spec);
SpectralFrames power_law_compress(const SpectralFrames& mag, float exponent = 0.3f);
SpectralFrames power_law_expand(const SpectralFrames& compressed, float exponent = 0.3f);

// Phase reconstruction from linear magnitudes. seed==0 selects the
// deterministic zero-phase init, otherwise phases start from seeded noise.
AudioClip griffin_lim(const SpectralFrames& mag, int iters = 32, uint64_t seed = 0,
                      std::vector<float>* residual_per_iter = nullptr);

AudioClip resample(const AudioClip& clip, int target_rate);
AudioClip lowpass(const AudioClip& clip, float cutoff_hz);

std::vector<float> convolve_full(std::span<const float> a, std::span<const float> b);

}  // namespace maskr::dsp
