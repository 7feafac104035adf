#include "maskr/codegram.hpp"

#include <cstring>
#include <fstream>

namespace maskr::codec {

namespace {
constexpr char kMagic[4] = {'C', 'G', 'R', 'M'};
constexpr uint8_t kVersion = 1;

template <typename T>
void put_le(std::vector<uint8_t>& out, T v) {
    uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get_le(const std::vector<uint8_t>& in, size_t& off) {
    if (off + sizeof(T) > in.size()) throw FormatError("codegram: truncated file");
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}
}  // namespace

void Codegram::validate_ids() const {
    for (uint16_t id : tokens)
        if (id >= codebook_size)
            throw DataError("codegram: token id " + std::to_string(id) + " >= K=" +
                            std::to_string(codebook_size));
}

std::vector<uint8_t> encode_codegram(const Codegram& cg) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    put_le<uint16_t>(out, static_cast<uint16_t>(cg.num_codebooks));
    put_le<uint16_t>(out, static_cast<uint16_t>(cg.codebook_size));
    put_le<uint32_t>(out, static_cast<uint32_t>(cg.frames));
    put_le<float>(out, cg.frame_rate);
    for (uint16_t id : cg.tokens) put_le<uint16_t>(out, id);
    return out;
}

Codegram decode_codegram(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("codegram: bad magic (expected CGRM)");
    size_t off = 4;
    uint8_t version = get_le<uint8_t>(bytes, off);
    if (version != kVersion)
        throw FormatError("codegram: unsupported version " + std::to_string(version));
    Codegram cg;
    cg.num_codebooks = get_le<uint16_t>(bytes, off);
    cg.codebook_size = get_le<uint16_t>(bytes, off);
    cg.frames = static_cast<int>(get_le<uint32_t>(bytes, off));
    cg.frame_rate = get_le<float>(bytes, off);
    size_t n = static_cast<size_t>(cg.num_codebooks) * static_cast<size_t>(cg.frames);
    if (off + n * 2 != bytes.size()) throw FormatError("codegram: size mismatch");
    cg.tokens.resize(n);
    std::memcpy(cg.tokens.data(), bytes.data() + off, n * 2);
    cg.validate_ids();
    return cg;
}

void save_codegram(const std::string& path, const Codegram& cg) {
    auto bytes = encode_codegram(cg);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("write failed: " + path);
}

Codegram load_codegram(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open codegram: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_codegram(bytes);
}

}  // namespace maskr::codec
