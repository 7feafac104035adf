#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maskr/tensor.hpp"

namespace maskr::nn {

// Ordered named-tensor container backing the "MSKR" checkpoint format:
// magic "MSKR", u8 version, then records of
//   {u16 name_len, name bytes, u32 rank, u32 dims..., f32 data}
// all little-endian. Round-trips bit-exactly.
struct NamedTensors {
    std::vector<std::pair<std::string, Tensor>> items;

    void put(std::string name, Tensor t);
    const Tensor* find(const std::string& name) const;
    const Tensor& require(const std::string& name) const;
    float scalar(const std::string& name) const;
    void put_scalar(const std::string& name, float v) { put(name, Tensor::scalar(v)); }
};

std::vector<uint8_t> encode_checkpoint(const NamedTensors& nt);
NamedTensors decode_checkpoint(const std::vector<uint8_t>& bytes);

void save_checkpoint(const std::string& path, const NamedTensors& nt);
NamedTensors load_checkpoint(const std::string& path);

uint64_t checkpoint_hash(const std::string& path);

}  // namespace maskr::nn
