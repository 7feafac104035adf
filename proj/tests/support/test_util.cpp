#include "test_util.hpp"

#include "maskr/dsp.hpp"

namespace testutil {

double band_energy(const maskr::audio::AudioClip& clip, double lo_hz, double hi_hz) {
    size_t n = 1;
    while (n < clip.samples.size()) n <<= 1;
    std::vector<std::complex<double>> buf(n, 0.0);
    for (size_t i = 0; i < clip.samples.size(); ++i) buf[i] = clip.samples[i];
    maskr::dsp::fft(buf, false);
    double e = 0.0;
    for (size_t k = 0; k <= n / 2; ++k) {
        double f = static_cast<double>(k) * clip.sample_rate / static_cast<double>(n);
        if (f >= lo_hz && f <= hi_hz) e += std::norm(buf[k]);
    }
    return e;
}

}  // namespace testutil
