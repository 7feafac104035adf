#include "maskr/util.hpp"

#include <cmath>
#include <cstdlib>

namespace maskr {

uint64_t fnv1a64(const void* data, size_t len, uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

int env_int(const char* name, int fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end == v || n <= 0) return fallback;
    return static_cast<int>(n);
}

void log_warn(const std::string& msg) { std::fprintf(stderr, "[maskr] warning: %s\n", msg.c_str()); }
void log_info(const std::string& msg) { std::fprintf(stderr, "[maskr] %s\n", msg.c_str()); }

}  // namespace maskr
