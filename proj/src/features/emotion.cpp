#include "features/emotion.hpp"

#include "common/error.hpp"
#include "features/content.hpp"
#include "features/rafe.hpp"

namespace svc::features {

std::vector<float> embed_emotion(const std::optional<std::string>& rafe_path,
                                 uint64_t seed, int dim) {
  if (!rafe_path) return std::vector<float>(dim, 0.0f);

  RafeData d = read_rafe(*rafe_path);
  if (d.frames > 1)
    raise(ErrorKind::FeatureFileError,
          "emotion file must hold one utterance-level vector: " + *rafe_path);
  if (int(d.dim) == dim) return d.values;

  const int src = int(d.dim);
  std::vector<float> out(dim, 0.0f);
  if (src >= dim) {
    // columns orthonormal in the source space; out = B^T v
    auto basis = orthonormal_projection(src, dim, seed);  // (src x dim)
    for (int r = 0; r < src; ++r)
      for (int c = 0; c < dim; ++c) out[c] += basis[size_t(r) * dim + c] * d.values[r];
  } else {
    // embed a small vector into the larger space; out = B v
    auto basis = orthonormal_projection(dim, src, seed);  // (dim x src)
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < src; ++c) out[r] += basis[size_t(r) * src + c] * d.values[c];
  }
  return out;
}

}  // namespace svc::features
