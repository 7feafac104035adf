#include "maskr/distortion.hpp"

#include <json.hpp>

#include <cmath>

#include "maskr/dsp.hpp"

namespace maskr::distortion {

using nlohmann::json;

CorruptionPolicy CorruptionPolicy::none_but_noise() {
    CorruptionPolicy p;
    p.p_reverb = p.p_bandwidth = p.p_clip = 0.0f;
    p.p_noise = 1.0f;
    return p;
}

CorruptionPolicy CorruptionPolicy::bandwidth_only() {
    CorruptionPolicy p;
    p.p_reverb = p.p_noise = p.p_clip = 0.0f;
    p.p_bandwidth = 1.0f;
    return p;
}

CorruptionPolicy CorruptionPolicy::clamped_to_rate(int sample_rate) const {
    CorruptionPolicy p = *this;
    float nyq = static_cast<float>(sample_rate) / 2.0f;
    p.cutoff_max_hz = std::min(p.cutoff_max_hz, nyq);
    p.cutoff_min_hz = std::min(p.cutoff_min_hz, p.cutoff_max_hz);
    return p;
}

std::string CorruptionRecipe::to_json_line() const {
    json j;
    j["seed"] = seed;
    if (rt60_s) j["rt60_s"] = *rt60_s;
    if (snr_db) j["snr_db"] = *snr_db;
    if (cutoff_hz) j["cutoff_hz"] = *cutoff_hz;
    if (clip_level) j["clip_level"] = *clip_level;
    j["noise"] = noise == NoiseKind::white ? "white" : "pink";
    j["mix_rescale"] = mix_rescale;
    j["final_rescale"] = final_rescale;
    return j.dump();
}

CorruptionRecipe CorruptionRecipe::from_json_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("recipe: invalid json: " + line);
    CorruptionRecipe r;
    r.seed = j.at("seed").get<uint64_t>();
    if (j.contains("rt60_s")) r.rt60_s = j["rt60_s"].get<float>();
    if (j.contains("snr_db")) r.snr_db = j["snr_db"].get<float>();
    if (j.contains("cutoff_hz")) r.cutoff_hz = j["cutoff_hz"].get<float>();
    if (j.contains("clip_level")) r.clip_level = j["clip_level"].get<float>();
    if (j.contains("noise")) r.noise = j["noise"] == "pink" ? NoiseKind::pink : NoiseKind::white;
    if (j.contains("mix_rescale")) r.mix_rescale = j["mix_rescale"].get<float>();
    if (j.contains("final_rescale")) r.final_rescale = j["final_rescale"].get<float>();
    return r;
}

MixResult mix_noise_at_snr(const AudioClip& clean, const AudioClip& noise, float snr_db) {
    float clean_rms = clean.rms();
    if (clean_rms <= 0.0f) throw DataError("mix_noise_at_snr: silent clean input");
    if (noise.samples.empty()) throw DataError("mix_noise_at_snr: empty noise");

    // loop/crop noise to the clean length
    std::vector<float> n(clean.samples.size());
    for (size_t i = 0; i < n.size(); ++i) n[i] = noise.samples[i % noise.samples.size()];
    double nacc = 0.0;
    for (float v : n) nacc += static_cast<double>(v) * v;
    float noise_rms = static_cast<float>(std::sqrt(nacc / static_cast<double>(n.size())));
    if (noise_rms <= 0.0f) throw DataError("mix_noise_at_snr: silent noise input");

    float gain = clean_rms / noise_rms * std::pow(10.0f, -snr_db / 20.0f);
    MixResult res;
    res.noise_gain = gain;
    res.clip.sample_rate = clean.sample_rate;
    res.clip.samples.resize(n.size());
    for (size_t i = 0; i < n.size(); ++i)
        res.clip.samples[i] = clean.samples[i] + gain * n[i];
    float peak = res.clip.peak();
    if (peak > 0.99f) {
        res.rescale = 0.99f / peak;
        for (float& v : res.clip.samples) v *= res.rescale;
    }
    return res;
}

std::vector<float> synth_rir(float rt60_s, int sample_rate, uint64_t seed) {
    if (rt60_s < 0.05f || rt60_s > 1.5f)
        throw ConfigError("synth_rir: rt60 must be in [0.05, 1.5] s");
    size_t len = static_cast<size_t>(std::ceil(sample_rate * rt60_s * 1.1)) + 256;
    std::vector<float> h(len);
    Rng rng(seed);
    h[0] = 1.0f;  // direct path
    double decay = -3.0 / (static_cast<double>(sample_rate) * rt60_s);  // log10 amplitude per sample
    for (size_t i = 1; i < len; ++i) {
        double amp = std::pow(10.0, decay * static_cast<double>(i));
        h[i] = static_cast<float>(amp * rng.normal());
    }
    return h;
}

AudioClip apply_reverb(const AudioClip& clean, const std::vector<float>& rir) {
    if (rir.empty()) throw DataError("apply_reverb: empty impulse response");
    std::vector<float> conv = dsp::convolve_full(clean.samples, rir);
    conv.resize(clean.samples.size());
    AudioClip out{std::move(conv), clean.sample_rate};
    float clean_peak = clean.peak();
    float wet_peak = out.peak();
    if (wet_peak > 0.0f && clean_peak > 0.0f) {
        float s = clean_peak / wet_peak;
        for (float& v : out.samples) v *= s;
    }
    return out;
}

AudioClip clip_signal(const AudioClip& clean, float clip_level) {
    if (clip_level <= 0.0f || clip_level > 1.0f)
        throw ConfigError("clip_signal: level must be in (0, 1]");
    float peak = clean.peak();
    if (peak == 0.0f) return clean;
    float threshold = clip_level * peak;
    AudioClip out = clean;
    for (float& v : out.samples) v = std::min(threshold, std::max(-threshold, v));
    return out;
}

AudioClip limit_bandwidth(const AudioClip& clean, float cutoff_hz) {
    return dsp::lowpass(clean, cutoff_hz);
}

AudioClip synth_noise(size_t length, int sample_rate, NoiseKind kind, uint64_t seed) {
    AudioClip out;
    out.sample_rate = sample_rate;
    out.samples.resize(length);
    Rng rng(seed);
    if (kind == NoiseKind::white) {
        for (float& v : out.samples) v = 0.1f * static_cast<float>(rng.normal());
    } else {
        // pink-ish: one-pole filtered white noise
        float state = 0.0f;
        for (float& v : out.samples) {
            float w = static_cast<float>(rng.normal());
            state = 0.98f * state + 0.02f * w;
            v = 0.1f * (state * 4.0f + 0.3f * w);
        }
    }
    return out;
}

namespace {
constexpr uint64_t kRirTag = 0x5249522D544147ULL;    // sub-stream tags
constexpr uint64_t kNoiseTag = 0x4E4F4953452D54ULL;
}  // namespace

AudioClip apply_recipe(const AudioClip& clean, CorruptionRecipe& recipe) {
    if (clean.samples.empty() || clean.peak() <= 0.0f)
        throw DataError("corrupt: degenerate (silent or empty) clean input");
    AudioClip x = clean;
    recipe.mix_rescale = 1.0f;
    recipe.final_rescale = 1.0f;
    if (recipe.rt60_s) {
        auto rir = synth_rir(*recipe.rt60_s, x.sample_rate, splitmix64(recipe.seed ^ kRirTag));
        x = apply_reverb(x, rir);
    }
    if (recipe.snr_db) {
        AudioClip noise = synth_noise(x.samples.size(), x.sample_rate, recipe.noise,
                                      splitmix64(recipe.seed ^ kNoiseTag));
        MixResult mix = mix_noise_at_snr(x, noise, *recipe.snr_db);
        x = std::move(mix.clip);
        recipe.mix_rescale = mix.rescale;
    }
    if (recipe.cutoff_hz) x = limit_bandwidth(x, *recipe.cutoff_hz);
    if (recipe.clip_level) x = clip_signal(x, *recipe.clip_level);
    float peak = x.peak();
    if (peak > 1.0f) {
        recipe.final_rescale = 0.99f / peak;
        for (float& v : x.samples) v *= recipe.final_rescale;
    }
    return x;
}

CorruptionRecipe sample_recipe(const CorruptionPolicy& policy, uint64_t seed) {
    if (policy.p_reverb <= 0.0f && policy.p_noise <= 0.0f && policy.p_bandwidth <= 0.0f &&
        policy.p_clip <= 0.0f)
        throw ConfigError("corrupt: all distortion probabilities are zero");
    Rng rng(seed);
    bool reverb = false, noise = false, bandwidth = false, clip = false;
    do {
        reverb = rng.bernoulli(policy.p_reverb);
        noise = rng.bernoulli(policy.p_noise);
        bandwidth = rng.bernoulli(policy.p_bandwidth);
        clip = rng.bernoulli(policy.p_clip);
    } while (!(reverb || noise || bandwidth || clip));

    CorruptionRecipe r;
    r.seed = seed;
    r.noise = policy.noise;
    if (reverb) r.rt60_s = rng.uniform_float(policy.rt60_min_s, policy.rt60_max_s);
    if (noise) r.snr_db = rng.uniform_float(policy.snr_min_db, policy.snr_max_db);
    if (bandwidth) r.cutoff_hz = rng.uniform_float(policy.cutoff_min_hz, policy.cutoff_max_hz);
    if (clip) r.clip_level = rng.uniform_float(policy.clip_min, policy.clip_max);
    return r;
}

std::pair<AudioClip, CorruptionRecipe> corrupt(const AudioClip& clean,
                                               const CorruptionPolicy& policy, uint64_t seed) {
    CorruptionRecipe recipe = sample_recipe(policy, seed);
    AudioClip out = apply_recipe(clean, recipe);
    return {std::move(out), std::move(recipe)};
}

}  // namespace maskr::distortion
