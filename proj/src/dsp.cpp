#include "maskr/dsp.hpp"

#include <algorithm>
#include <cmath>

namespace maskr::dsp {

namespace {
constexpr double kPi = 3.14159265358979323846;

// reflect index into [0, n) without repeating the edge sample
size_t reflect_index(long long i, long long n) {
    if (n == 1) return 0;
    long long period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    if (i >= n) i = period - i;
    return static_cast<size_t>(i);
}

double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 32; ++k) {
        term *= (x / (2.0 * k)) * (x / (2.0 * k));
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int stft_frame_count(size_t len, int hop) {
    return static_cast<int>((len + static_cast<size_t>(hop) - 1) / static_cast<size_t>(hop));
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
    size_t n = a.size();
    if (!is_power_of_two(static_cast<int>(n))) throw ConfigError("fft size must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

std::vector<float> hann_window(int n) {
    std::vector<float> w(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        w[static_cast<size_t>(i)] =
            static_cast<float>(0.5 * (1.0 - std::cos(2.0 * kPi * i / n)));
    return w;
}

ComplexSpectrum stft(const AudioClip& clip, int window, int hop) {
    if (clip.samples.empty()) throw DataError("stft: empty clip");
    if (!is_power_of_two(window)) throw ConfigError("stft: window must be a power of two");
    if (window < hop || hop <= 0) throw ConfigError("stft: need window >= hop > 0");
    long long n = static_cast<long long>(clip.samples.size());
    int pad = window / 2;
    int T = stft_frame_count(clip.samples.size(), hop);
    int F = window / 2 + 1;
    std::vector<float> win = hann_window(window);

    ComplexSpectrum out;
    out.window = window;
    out.hop = hop;
    out.sample_rate = clip.sample_rate;
    out.frames = T;
    out.bins = F;
    out.data.resize(static_cast<size_t>(T) * F);

    std::vector<std::complex<double>> buf(static_cast<size_t>(window));
    for (int t = 0; t < T; ++t) {
        long long start = static_cast<long long>(t) * hop - pad;
        for (int i = 0; i < window; ++i) {
            double s = clip.samples[reflect_index(start + i, n)];
            buf[static_cast<size_t>(i)] = s * static_cast<double>(win[static_cast<size_t>(i)]);
        }
        fft(buf, false);
        for (int f = 0; f < F; ++f)
            out.at(t, f) = std::complex<float>(static_cast<float>(buf[static_cast<size_t>(f)].real()),
                                               static_cast<float>(buf[static_cast<size_t>(f)].imag()));
    }
    return out;
}

std::vector<float> istft(const ComplexSpectrum& spec, size_t length) {
    int window = spec.window, hop = spec.hop, T = spec.frames, F = spec.bins;
    int pad = window / 2;
    std::vector<float> win = hann_window(window);
    std::vector<double> acc(length, 0.0), den(length, 0.0);
    std::vector<std::complex<double>> buf(static_cast<size_t>(window));
    for (int t = 0; t < T; ++t) {
        for (int f = 0; f < F; ++f) buf[static_cast<size_t>(f)] = spec.at(t, f);
        for (int f = F; f < window; ++f) buf[static_cast<size_t>(f)] = std::conj(buf[static_cast<size_t>(window - f)]);
        fft(buf, true);
        long long start = static_cast<long long>(t) * hop - pad;
        for (int i = 0; i < window; ++i) {
            long long j = start + i;
            if (j < 0 || j >= static_cast<long long>(length)) continue;
            double w = win[static_cast<size_t>(i)];
            acc[static_cast<size_t>(j)] += w * buf[static_cast<size_t>(i)].real();
            den[static_cast<size_t>(j)] += w * w;
        }
    }
    std::vector<float> out(length, 0.0f);
    for (size_t i = 0; i < length; ++i)
        if (den[i] > 1e-10) out[i] = static_cast<float>(acc[i] / den[i]);
    return out;
}

SpectralFrames magnitude(const ComplexSpectrum& spec) {
    SpectralFrames m;
    m.window = spec.window;
    m.hop = spec.hop;
    m.sample_rate = spec.sample_rate;
    m.frames = spec.frames;
    m.bins = spec.bins;
    m.data.resize(spec.data.size());
    for (size_t i = 0; i < spec.data.size(); ++i) m.data[i] = std::abs(spec.data[i]);
    return m;
}

SpectralFrames power_law_compress(const SpectralFrames& mag, float exponent) {
    SpectralFrames out = mag;
    for (float& v : out.data) {
        if (v < 0.0f) throw DataError("power_law_compress: negative magnitude");
        v = std::pow(v, exponent);
    }
    return out;
}

SpectralFrames power_law_expand(const SpectralFrames& compressed, float exponent) {
    SpectralFrames out = compressed;
    float inv = 1.0f / exponent;
    for (float& v : out.data) {
        if (v < 0.0f) throw DataError("power_law_expand: negative input");
        v = std::pow(v, inv);
    }
    return out;
}

AudioClip griffin_lim(const SpectralFrames& mag, int iters, uint64_t seed,
                      std::vector<float>* residual_per_iter) {
    int T = mag.frames, F = mag.bins;
    size_t length = static_cast<size_t>(T) * mag.hop;
    ComplexSpectrum spec;
    spec.window = mag.window;
    spec.hop = mag.hop;
    spec.sample_rate = mag.sample_rate;
    spec.frames = T;
    spec.bins = F;
    spec.data.resize(static_cast<size_t>(T) * F);

    std::vector<float> phase(static_cast<size_t>(T) * F, 0.0f);
    if (seed != 0) {
        Rng rng(seed);
        for (float& p : phase)
            p = static_cast<float>((rng.uniform() * 2.0 - 1.0) * kPi);
    }
    double mag_norm = 1e-20;
    for (float v : mag.data) mag_norm += static_cast<double>(v) * v;

    std::vector<float> x;
    for (int it = 0; it < std::max(1, iters); ++it) {
        for (size_t i = 0; i < spec.data.size(); ++i)
            spec.data[i] = std::polar(mag.data[i], phase[i]);
        x = istft(spec, length);
        AudioClip tmp{std::move(x), mag.sample_rate};
        ComplexSpectrum re = stft(tmp, mag.window, mag.hop);
        x = std::move(tmp.samples);
        if (residual_per_iter) {
            // projection distance between the magnitude-consistent point and
            // its time-consistent image; non-increasing for this iteration
            double err = 0.0;
            for (size_t i = 0; i < re.data.size(); ++i) {
                std::complex<double> d =
                    std::complex<double>(re.data[i]) - std::complex<double>(spec.data[i]);
                err += std::norm(d);
            }
            residual_per_iter->push_back(static_cast<float>(std::sqrt(err / mag_norm)));
        }
        for (size_t i = 0; i < re.data.size(); ++i)
            phase[i] = std::arg(re.data[i]);
    }
    for (size_t i = 0; i < spec.data.size(); ++i)
        spec.data[i] = std::polar(mag.data[i], phase[i]);
    return AudioClip{istft(spec, length), mag.sample_rate};
}

AudioClip resample(const AudioClip& clip, int target_rate) {
    if (clip.sample_rate <= 0 || target_rate <= 0)
        throw ConfigError("resample: rates must be positive");
    if (target_rate == clip.sample_rate) return clip;
    double ratio = static_cast<double>(target_rate) / clip.sample_rate;
    size_t out_len = static_cast<size_t>(std::llround(clip.samples.size() * ratio));
    double fc = 0.5 * std::min(1.0, ratio);  // in input-sample units
    int half = ratio >= 1.0 ? 32 : static_cast<int>(std::ceil(32.0 / ratio));
    std::vector<float> out(out_len, 0.0f);
    long long n = static_cast<long long>(clip.samples.size());
    for (size_t i = 0; i < out_len; ++i) {
        double center = static_cast<double>(i) / ratio;
        long long base = static_cast<long long>(std::floor(center));
        double frac = center - static_cast<double>(base);
        double acc = 0.0, wsum = 0.0;
        for (int k = -half + 1; k <= half; ++k) {
            double t = static_cast<double>(k) - frac;
            double w = 2.0 * fc * sinc(2.0 * fc * t) *
                       (0.42 + 0.5 * std::cos(kPi * t / half) + 0.08 * std::cos(2.0 * kPi * t / half));
            wsum += w;
            long long j = base + k;
            if (j >= 0 && j < n) acc += w * clip.samples[static_cast<size_t>(j)];
        }
        out[i] = static_cast<float>(wsum != 0.0 ? acc / wsum : 0.0);
    }
    return AudioClip{std::move(out), target_rate};
}

AudioClip lowpass(const AudioClip& clip, float cutoff_hz) {
    double nyquist = clip.sample_rate / 2.0;
    if (cutoff_hz <= 0.0f || cutoff_hz > nyquist)
        throw DataError("lowpass: cutoff must be in (0, nyquist]");
    if (cutoff_hz >= nyquist * 0.999) return clip;  // full band

    // Kaiser design, 60 dB stopband starting at 1.25*cutoff
    double trans = std::min(0.25 * cutoff_hz, nyquist - cutoff_hz);
    double dw = 2.0 * kPi * trans / clip.sample_rate;
    double atten = 60.0;
    double beta = 0.1102 * (atten - 8.7);
    int taps = static_cast<int>(std::ceil((atten - 7.95) / (2.285 * dw)));
    if (taps % 2 == 0) ++taps;
    int m = (taps - 1) / 2;
    double fc = (cutoff_hz + trans * 0.5) / clip.sample_rate;  // transition midpoint
    std::vector<float> h(static_cast<size_t>(taps));
    double i0b = bessel_i0(beta);
    double sum = 0.0;
    for (int i = 0; i < taps; ++i) {
        double t = i - m;
        double r = t / m;
        double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        double v = 2.0 * fc * sinc(2.0 * fc * t) * w;
        h[static_cast<size_t>(i)] = static_cast<float>(v);
        sum += v;
    }
    for (float& v : h) v = static_cast<float>(v / sum);  // unity DC gain

    std::vector<float> conv = convolve_full(clip.samples, h);
    std::vector<float> out(clip.samples.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = conv[i + static_cast<size_t>(m)];
    return AudioClip{std::move(out), clip.sample_rate};
}

std::vector<float> convolve_full(std::span<const float> a, std::span<const float> b) {
    if (a.empty() || b.empty()) return {};
    size_t out_len = a.size() + b.size() - 1;
    size_t n = 1;
    while (n < out_len) n <<= 1;
    std::vector<std::complex<double>> fa(n), fb(n);
    for (size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
    for (size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
    fft(fa, false);
    fft(fb, false);
    for (size_t i = 0; i < n; ++i) fa[i] *= fb[i];
    fft(fa, true);
    std::vector<float> out(out_len);
    for (size_t i = 0; i < out_len; ++i) out[i] = static_cast<float>(fa[i].real());
    return out;
}

}  // namespace maskr::dsp
