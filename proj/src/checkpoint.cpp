#include "maskr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "maskr/util.hpp"

namespace maskr::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'S', 'K', 'R'};
constexpr uint8_t kVersion = 1;

template <typename T>
void put_le(std::vector<uint8_t>& out, T v) {
    uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get_le(const std::vector<uint8_t>& in, size_t& off) {
    if (off + sizeof(T) > in.size()) throw FormatError("checkpoint: truncated file");
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

void NamedTensors::put(std::string name, Tensor t) {
    items.emplace_back(std::move(name), std::move(t));
}

const Tensor* NamedTensors::find(const std::string& name) const {
    for (const auto& [n, t] : items)
        if (n == name) return &t;
    return nullptr;
}

const Tensor& NamedTensors::require(const std::string& name) const {
    const Tensor* t = find(name);
    if (!t) throw FormatError("checkpoint: missing tensor '" + name + "'");
    return *t;
}

float NamedTensors::scalar(const std::string& name) const {
    const Tensor& t = require(name);
    if (t.numel() != 1) throw FormatError("checkpoint: '" + name + "' is not a scalar");
    return t.data[0];
}

std::vector<uint8_t> encode_checkpoint(const NamedTensors& nt) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    for (const auto& [name, t] : nt.items) {
        if (name.size() > 0xFFFF) throw FormatError("checkpoint: tensor name too long");
        put_le<uint16_t>(out, static_cast<uint16_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        put_le<uint32_t>(out, static_cast<uint32_t>(t.shape.size()));
        for (int d : t.shape) put_le<uint32_t>(out, static_cast<uint32_t>(d));
        size_t bytes = t.data.size() * sizeof(float);
        size_t base = out.size();
        out.resize(base + bytes);
        std::memcpy(out.data() + base, t.data.data(), bytes);
    }
    return out;
}

NamedTensors decode_checkpoint(const std::vector<uint8_t>& bytes) {
    size_t off = 0;
    if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("checkpoint: bad magic (expected MSKR)");
    off = 4;
    uint8_t version = get_le<uint8_t>(bytes, off);
    if (version != kVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    NamedTensors nt;
    while (off < bytes.size()) {
        uint16_t name_len = get_le<uint16_t>(bytes, off);
        if (off + name_len > bytes.size()) throw FormatError("checkpoint: truncated name");
        std::string name(reinterpret_cast<const char*>(bytes.data() + off), name_len);
        off += name_len;
        uint32_t rank = get_le<uint32_t>(bytes, off);
        if (rank > 8) throw FormatError("checkpoint: implausible rank");
        Shape shape(rank);
        int64_t n = 1;
        for (uint32_t i = 0; i < rank; ++i) {
            shape[i] = static_cast<int>(get_le<uint32_t>(bytes, off));
            n *= shape[i];
        }
        if (off + static_cast<size_t>(n) * sizeof(float) > bytes.size())
            throw FormatError("checkpoint: truncated tensor data");
        std::vector<float> data(static_cast<size_t>(n));
        std::memcpy(data.data(), bytes.data() + off, data.size() * sizeof(float));
        off += data.size() * sizeof(float);
        nt.put(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    return nt;
}

void save_checkpoint(const std::string& path, const NamedTensors& nt) {
    std::vector<uint8_t> bytes = encode_checkpoint(nt);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("write failed: " + path);
}

NamedTensors load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

uint64_t checkpoint_hash(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes.data(), bytes.size());
}

}  // namespace maskr::nn
