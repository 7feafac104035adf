#include "maskr/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace maskr::audio {

float AudioClip::peak() const {
    float p = 0.0f;
    for (float s : samples) p = std::max(p, std::abs(s));
    return p;
}

float AudioClip::rms() const {
    if (samples.empty()) return 0.0f;
    double acc = 0.0;
    for (float s : samples) acc += static_cast<double>(s) * s;
    return static_cast<float>(std::sqrt(acc / static_cast<double>(samples.size())));
}

namespace {

struct Reader {
    const std::vector<uint8_t>& b;
    size_t off = 0;
    explicit Reader(const std::vector<uint8_t>& bytes) : b(bytes) {}
    template <typename T>
    T get() {
        if (off + sizeof(T) > b.size()) throw FormatError("wav: truncated file");
        T v;
        std::memcpy(&v, b.data() + off, sizeof(T));
        off += sizeof(T);
        return v;
    }
    void expect_tag(const char* tag) {
        if (off + 4 > b.size() || std::memcmp(b.data() + off, tag, 4) != 0)
            throw FormatError(std::string("wav: expected chunk '") + tag + "'");
        off += 4;
    }
    bool tag_is(const char* tag) const {
        return off + 4 <= b.size() && std::memcmp(b.data() + off, tag, 4) == 0;
    }
};

}  // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open wav: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Reader r(bytes);
    r.expect_tag("RIFF");
    r.get<uint32_t>();
    r.expect_tag("WAVE");

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    bool have_fmt = false;
    AudioClip clip;

    while (r.off + 8 <= bytes.size()) {
        char tag[5] = {0};
        std::memcpy(tag, bytes.data() + r.off, 4);
        r.off += 4;
        uint32_t size = r.get<uint32_t>();
        size_t next = r.off + size + (size & 1);
        if (std::strcmp(tag, "fmt ") == 0) {
            format = r.get<uint16_t>();
            channels = r.get<uint16_t>();
            rate = r.get<uint32_t>();
            r.get<uint32_t>();
            r.get<uint16_t>();
            bits = r.get<uint16_t>();
            have_fmt = true;
        } else if (std::strcmp(tag, "data") == 0) {
            if (!have_fmt) throw FormatError("wav: data chunk before fmt");
            if (channels == 0) throw FormatError("wav: zero channels");
            size_t frame_bytes = static_cast<size_t>(channels) * (bits / 8);
            if (frame_bytes == 0 || r.off + size > bytes.size())
                throw FormatError("wav: bad data chunk");
            size_t frames = size / frame_bytes;
            clip.samples.resize(frames);
            const uint8_t* p = bytes.data() + r.off;
            if (format == 1 && bits == 16) {
                for (size_t i = 0; i < frames; ++i) {
                    double acc = 0.0;
                    for (int c = 0; c < channels; ++c) {
                        int16_t s;
                        std::memcpy(&s, p + (i * channels + c) * 2, 2);
                        acc += s / 32768.0;
                    }
                    clip.samples[i] = static_cast<float>(acc / channels);
                }
            } else if (format == 3 && bits == 32) {
                for (size_t i = 0; i < frames; ++i) {
                    double acc = 0.0;
                    for (int c = 0; c < channels; ++c) {
                        float s;
                        std::memcpy(&s, p + (i * channels + c) * 4, 4);
                        acc += s;
                    }
                    clip.samples[i] = static_cast<float>(acc / channels);
                }
            } else {
                throw FormatError("wav: unsupported encoding (PCM16 and float32 only)");
            }
        }
        r.off = next;
    }
    if (!have_fmt || clip.samples.empty()) throw FormatError("wav: missing fmt or data chunk");
    if (channels > 1) log_warn("downmixed " + std::to_string(channels) + "-channel wav: " + path);
    clip.sample_rate = static_cast<int>(rate);
    return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
    if (clip.sample_rate <= 0) throw DataError("write_wav: sample_rate must be positive");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * 2);
    uint32_t riff_size = 36 + data_size;
    auto w16 = [&](uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
    auto w32 = [&](uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    f.write("RIFF", 4);
    w32(riff_size);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    w32(16);
    w16(1);  // PCM
    w16(1);  // mono
    w32(static_cast<uint32_t>(clip.sample_rate));
    w32(static_cast<uint32_t>(clip.sample_rate) * 2);
    w16(2);
    w16(16);
    f.write("data", 4);
    w32(data_size);
    for (float s : clip.samples) {
        float c = std::min(1.0f, std::max(-1.0f, s));
        int16_t v = static_cast<int16_t>(std::lrintf(c * 32767.0f));
        f.write(reinterpret_cast<const char*>(&v), 2);
    }
    if (!f) throw DataError("write failed: " + path);
}

}  // namespace maskr::audio
