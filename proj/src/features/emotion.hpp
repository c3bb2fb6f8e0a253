#pragma once

#include <optional>
#include <string>
#include <vector>

namespace svc::features {

constexpr int kEmotionDim = 256;

// No file configured -> the zero vector ("no emotion conditioning").
// A file with a matching dim is taken verbatim; other dims go through a
// seed-fixed orthonormal projection.
std::vector<float> embed_emotion(const std::optional<std::string>& rafe_path,
                                 uint64_t seed, int dim = kEmotionDim);

}  // namespace svc::features
