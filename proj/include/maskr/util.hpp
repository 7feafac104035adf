#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace maskr {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct TrainingDiverged : Error { using Error::Error; };

[[noreturn]] inline void throw_dim(const std::string& msg) { throw DimensionError("dimension error: " + msg); }

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic RNG wrapper. All transforms are hand-rolled so that streams
// are identical across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : seed_(seed), gen_(splitmix64(seed)) {}

    uint64_t bits() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    float uniform_float(float lo, float hi) {
        return lo + static_cast<float>(uniform()) * (hi - lo);
    }

    // inclusive on both ends
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(bits() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0, u2 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Independent child stream addressed by tag.
    Rng fork(uint64_t tag) const {
        return Rng(splitmix64(seed_ ^ splitmix64(tag + 0x517CC1B727220A95ULL)));
    }

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xCBF29CE484222325ULL);

int env_int(const char* name, int fallback);

void log_warn(const std::string& msg);
void log_info(const std::string& msg);

}  // namespace maskr
