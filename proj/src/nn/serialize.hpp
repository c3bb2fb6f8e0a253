#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nn/tensor.hpp"

namespace svc::nn {

// Binary named-tensor container, little-endian:
//   magic "RASV", u32 version=1, u64 global step, u32 tensor count,
//   then per tensor: u16 name length, UTF-8 name, u8 rank, u32 dims[rank],
//   float32 values row-major.
// Optimizer state lives in a sibling file with suffix ".opt", same framing.

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

void write_rasv(const std::string& path, uint64_t global_step,
                const std::vector<NamedTensor>& tensors);

std::pair<uint64_t, std::vector<NamedTensor>> read_rasv(const std::string& path);

}  // namespace svc::nn
