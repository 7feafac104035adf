#include <doctest.h>

#include <filesystem>

#include "maskr/dsp.hpp"

#include "support/test_util.hpp"

using namespace maskr;
using namespace maskr::dsp;

TEST_SUITE_BEGIN("dsp");

TEST_CASE("fft matches naive DFT") {
    Rng rng(21);
    std::vector<double> x(64);
    for (double& v : x) v = rng.uniform() * 2.0 - 1.0;
    std::vector<std::complex<double>> a(x.begin(), x.end());
    fft(a, false);
    auto ref = testutil::naive_dft(x);
    for (size_t k = 0; k < x.size(); ++k)
        CHECK(std::abs(a[k] - ref[k]) < 1e-9);
}

TEST_CASE("stft: 3 s at 44.1 kHz with hop 512 gives 259 frames") {
    auto clip = testutil::sine(440.0f, 3.0f, 44100);
    REQUIRE(clip.samples.size() == 132300);
    auto spec = stft(clip, 2048, 512);
    CHECK(spec.frames == 259);
    CHECK(spec.bins == 1025);
}

TEST_CASE("stft: frame count is ceil(len/hop)") {
    audio::AudioClip clip;
    clip.sample_rate = 16000;
    clip.samples.assign(1024 * 5 + 1, 0.1f);
    auto spec = stft(clip, 1024, 256);
    CHECK(spec.frames == stft_frame_count(clip.samples.size(), 256));
    CHECK(spec.frames == 21);
}

TEST_CASE("stft: DC input concentrates energy in bin 0") {
    audio::AudioClip clip;
    clip.sample_rate = 16000;
    clip.samples.assign(8000, 0.5f);
    auto spec = stft(clip, 1024, 256);
    auto mag = magnitude(spec);
    int t = spec.frames / 2;
    int best = 0;
    for (int f = 1; f < spec.bins; ++f)
        if (mag.at(t, f) > mag.at(t, best)) best = f;
    CHECK(best == 0);
}

TEST_CASE("stft: window must be a power of two") {
    auto clip = testutil::sine(100.0f, 0.2f, 16000);
    CHECK_THROWS_AS(stft(clip, 1000, 256), ConfigError);
}

TEST_CASE("stft: framewise Parseval identity") {
    auto clip = testutil::white_noise(0.4f, 16000, 22);
    int window = 1024, hop = 256;
    auto spec = stft(clip, window, hop);
    auto win = hann_window(window);
    // middle frame, away from padding
    int t = spec.frames / 2;
    long long start = static_cast<long long>(t) * hop - window / 2;
    double time_energy = 0.0;
    for (int i = 0; i < window; ++i) {
        double s = clip.samples[static_cast<size_t>(start + i)] * win[static_cast<size_t>(i)];
        time_energy += s * s;
    }
    double spec_energy = std::norm(spec.at(t, 0)) + std::norm(spec.at(t, spec.bins - 1));
    for (int f = 1; f < spec.bins - 1; ++f) spec_energy += 2.0 * std::norm(spec.at(t, f));
    spec_energy /= window;
    CHECK(std::abs(spec_energy - time_energy) / time_energy < 1e-3);
}

TEST_CASE("istft reconstructs the input with true phase") {
    auto clip = testutil::white_noise(0.5f, 16000, 23);
    auto spec = stft(clip, 1024, 256);
    auto rec = istft(spec, clip.samples.size());
    double max_err = 0.0;
    for (size_t i = 0; i < clip.samples.size(); ++i)
        max_err = std::max(max_err, std::abs(static_cast<double>(rec[i]) - clip.samples[i]));
    CHECK(max_err < 1e-4);
}

TEST_CASE("power law: endpoints and a calculator value") {
    SpectralFrames m;
    m.window = 4;
    m.hop = 2;
    m.sample_rate = 16000;
    m.frames = 1;
    m.bins = 3;
    m.data = {0.0f, 1.0f, 0.5f};
    auto c = power_law_compress(m, 0.3f);
    CHECK(c.data[0] == 0.0f);
    CHECK(c.data[1] == doctest::Approx(1.0f));
    CHECK(c.data[2] == doctest::Approx(0.8122523963562356).epsilon(1e-6));
}

TEST_CASE("power law: rejects negative input and preserves order") {
    SpectralFrames m;
    m.frames = 1;
    m.bins = 2;
    m.data = {-0.1f, 0.2f};
    CHECK_THROWS_AS(power_law_compress(m, 0.3f), DataError);

    Rng rng(24);
    SpectralFrames ok;
    ok.frames = 1;
    ok.bins = 64;
    ok.data.resize(64);
    for (float& v : ok.data) v = rng.uniform_float(0.0f, 4.0f);
    auto c = power_law_compress(ok, 0.3f);
    for (int i = 0; i < 63; ++i) {
        bool lt = ok.data[static_cast<size_t>(i)] < ok.data[static_cast<size_t>(i + 1)];
        bool clt = c.data[static_cast<size_t>(i)] < c.data[static_cast<size_t>(i + 1)];
        CHECK(lt == clt);
    }
    auto back = power_law_expand(c, 0.3f);
    for (int i = 0; i < 64; ++i)
        CHECK(back.data[static_cast<size_t>(i)] ==
              doctest::Approx(ok.data[static_cast<size_t>(i)]).epsilon(1e-4));
}

TEST_CASE("griffin_lim: zero magnitude gives silence") {
    SpectralFrames m;
    m.window = 512;
    m.hop = 128;
    m.sample_rate = 16000;
    m.frames = 20;
    m.bins = 257;
    m.data.assign(static_cast<size_t>(20) * 257, 0.0f);
    auto out = griffin_lim(m, 8);
    for (float v : out.samples) CHECK(v == 0.0f);
}

TEST_CASE("griffin_lim: projection residual is non-increasing") {
    // speech-like: two tones plus noise floor; boundary frames contribute a
    // small non-ideal term, hence the relative slack
    auto clip = testutil::sine(500.0f, 1.5f, 16000);
    auto extra = testutil::sine(1700.0f, 1.5f, 16000, 0.2f);
    for (size_t i = 0; i < clip.samples.size(); ++i) clip.samples[i] += extra.samples[i];
    auto mag = magnitude(stft(clip, 1024, 256));
    std::vector<float> residuals;
    griffin_lim(mag, 24, 0, &residuals);
    REQUIRE(residuals.size() == 24);
    for (size_t i = 1; i < residuals.size(); ++i)
        CHECK(residuals[i] <= residuals[i - 1] * (1.0f + 1e-3f));
    CHECK(residuals.back() < residuals.front());
}

TEST_CASE("griffin_lim: sine reconstruction keeps the dominant frequency") {
    auto clip = testutil::sine(440.0f, 0.5f, 16000);
    auto mag = magnitude(stft(clip, 1024, 256));
    auto rec = griffin_lim(mag, 32);
    double in_band = testutil::band_energy(rec, 380.0, 500.0);
    double total = testutil::band_energy(rec, 0.0, 8000.0);
    CHECK(in_band / total > 0.9);
}

TEST_CASE("resample: same rate is identity") {
    auto clip = testutil::sine(440.0f, 0.25f, 16000);
    auto out = resample(clip, 16000);
    CHECK(out.samples == clip.samples);
}

TEST_CASE("resample: 1 kHz tone stays at 1 kHz after 16k -> 44.1k") {
    auto clip = testutil::sine(1000.0f, 0.5f, 16000);
    auto out = resample(clip, 44100);
    CHECK(std::abs(static_cast<long long>(out.samples.size()) -
                   std::llround(clip.samples.size() * 44100.0 / 16000.0)) <= 1);
    double peak_band = testutil::band_energy(out, 950.0, 1050.0);
    double rest = testutil::band_energy(out, 0.0, 22050.0) - peak_band;
    CHECK(peak_band > rest * 10.0);
}

TEST_CASE("resample: 44.1k -> 16k -> 44.1k round trip above 30 dB SNR") {
    // band-limited content: sum of tones below 4 kHz
    audio::AudioClip clip;
    clip.sample_rate = 44100;
    clip.samples.resize(44100);
    for (size_t i = 0; i < clip.samples.size(); ++i) {
        double t = static_cast<double>(i) / 44100.0;
        clip.samples[i] = static_cast<float>(0.3 * std::sin(2 * 3.14159265 * 440 * t) +
                                             0.2 * std::sin(2 * 3.14159265 * 1330 * t) +
                                             0.1 * std::sin(2 * 3.14159265 * 3700 * t));
    }
    auto down = resample(clip, 16000);
    auto up = resample(down, 44100);
    size_t n = std::min(clip.samples.size(), up.samples.size());
    // ignore filter edges
    std::vector<float> a(clip.samples.begin() + 2000, clip.samples.begin() + n - 2000);
    std::vector<float> b(up.samples.begin() + 2000, up.samples.begin() + n - 2000);
    CHECK(testutil::snr_db(a, b) > 30.0);
}

TEST_CASE("lowpass: cutoff at nyquist is a passthrough") {
    auto clip = testutil::white_noise(0.3f, 44100, 25);
    auto out = lowpass(clip, 22050.0f);
    double e_in = testutil::band_energy(clip, 0, 22050);
    double e_out = testutil::band_energy(out, 0, 22050);
    CHECK(std::abs(10.0 * std::log10(e_out / e_in)) < 0.1);
}

TEST_CASE("lowpass: 40 dB stopband beyond 1.25x cutoff") {
    auto clip = testutil::white_noise(1.0f, 44100, 26);
    auto out = lowpass(clip, 4000.0f);
    double stop_in = testutil::band_energy(clip, 5000, 22050);
    double stop_out = testutil::band_energy(out, 5000, 22050);
    CHECK(10.0 * std::log10(stop_in / stop_out) >= 40.0);
    double pass_in = testutil::band_energy(clip, 0, 3500);
    double pass_out = testutil::band_energy(out, 0, 3500);
    CHECK(std::abs(10.0 * std::log10(pass_out / pass_in)) < 0.5);
}

TEST_CASE("lowpass: DC offset preserved within 1 percent") {
    audio::AudioClip clip;
    clip.sample_rate = 16000;
    clip.samples.assign(16000, 0.25f);
    auto out = lowpass(clip, 2000.0f);
    double mean = 0.0;
    for (size_t i = 4000; i < 12000; ++i) mean += out.samples[i];
    mean /= 8000.0;
    CHECK(std::abs(mean - 0.25) / 0.25 < 0.01);
}

TEST_CASE("lowpass: cutoff above nyquist rejected") {
    auto clip = testutil::sine(440.0f, 0.1f, 16000);
    CHECK_THROWS_AS(lowpass(clip, 9000.0f), DataError);
}

TEST_CASE("convolve_full matches the naive oracle") {
    Rng rng(27);
    std::vector<float> a(200), b(37);
    for (float& v : a) v = rng.uniform_float(-1, 1);
    for (float& v : b) v = rng.uniform_float(-1, 1);
    auto fast = convolve_full(a, b);
    auto ref = testutil::naive_convolve(a, b);
    REQUIRE(fast.size() == ref.size());
    for (size_t i = 0; i < ref.size(); ++i)
        CHECK(std::abs(fast[i] - ref[i]) < 1e-5f);
}

TEST_CASE("wav: PCM16 round trip and stereo downmix") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "maskr_dsp_test";
    fs::create_directories(dir);
    auto clip = testutil::sine(440.0f, 0.2f, 16000);
    std::string path = (dir / "tone.wav").string();
    audio::write_wav(path, clip);
    auto back = audio::read_wav(path);
    CHECK(back.sample_rate == 16000);
    REQUIRE(back.samples.size() == clip.samples.size());
    double err = 0.0;
    for (size_t i = 0; i < clip.samples.size(); ++i)
        err = std::max(err, std::abs(static_cast<double>(back.samples[i]) - clip.samples[i]));
    CHECK(err < 1.0 / 32000.0);
    fs::remove_all(dir);
}

TEST_SUITE_END();
