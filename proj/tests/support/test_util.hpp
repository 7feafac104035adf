#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "maskr/audio.hpp"
#include "maskr/tensor.hpp"

namespace testutil {

inline maskr::audio::AudioClip sine(float freq_hz, float seconds, int rate, float amp = 0.5f) {
    maskr::audio::AudioClip c;
    c.sample_rate = rate;
    size_t n = static_cast<size_t>(seconds * rate);
    c.samples.resize(n);
    for (size_t i = 0; i < n; ++i)
        c.samples[i] = amp * std::sin(2.0 * 3.14159265358979323846 * freq_hz * i / rate);
    return c;
}

inline maskr::audio::AudioClip white_noise(float seconds, int rate, uint64_t seed, float amp = 0.3f) {
    maskr::audio::AudioClip c;
    c.sample_rate = rate;
    maskr::Rng rng(seed);
    size_t n = static_cast<size_t>(seconds * rate);
    c.samples.resize(n);
    for (size_t i = 0; i < n; ++i) c.samples[i] = amp * static_cast<float>(rng.normal());
    return c;
}

// O(n^2) DFT oracle, independent of the radix-2 implementation
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (size_t i = 0; i < n; ++i) {
            double ang = -2.0 * 3.14159265358979323846 * static_cast<double>(k) * i / n;
            acc += x[i] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

// O(n*m) convolution oracle
inline std::vector<float> naive_convolve(const std::vector<float>& a, const std::vector<float>& b) {
    std::vector<float> out(a.size() + b.size() - 1, 0.0f);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    return out;
}

// energy of FFT bins between lo and hi Hz
double band_energy(const maskr::audio::AudioClip& clip, double lo_hz, double hi_hz);

inline maskr::nn::Tensor random_tensor(maskr::Rng& rng, maskr::nn::Shape shape, float a = 1.0f) {
    maskr::nn::Tensor t = maskr::nn::Tensor::zeros(std::move(shape));
    for (float& v : t.data) v = rng.uniform_float(-a, a);
    return t;
}

inline double snr_db(const std::vector<float>& ref, const std::vector<float>& test) {
    double sig = 1e-30, err = 1e-30;
    size_t n = std::min(ref.size(), test.size());
    for (size_t i = 0; i < n; ++i) {
        sig += static_cast<double>(ref[i]) * ref[i];
        double d = static_cast<double>(test[i]) - ref[i];
        err += d * d;
    }
    return 10.0 * std::log10(sig / err);
}

}  // namespace testutil
