#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace svc::features {

// Feature file container, little-endian:
//   magic "RAFE", u32 version=1, u32 frame count T (0 = single utterance-level
//   vector), u32 dim D, then T*D (or D) float32 values row-major.
struct RafeData {
  uint32_t frames = 0;  // 0 means one utterance-level vector of size dim
  uint32_t dim = 0;
  std::vector<float> values;

  size_t rows() const { return frames == 0 ? 1 : frames; }
};

RafeData read_rafe(const std::string& path);
void write_rafe(const std::string& path, const RafeData& data);

}  // namespace svc::features
