#pragma once

#include <cstdint>
#include <vector>

namespace svc::features {

constexpr double kF0MinHz = 50.0;
constexpr double kF0MaxHz = 1100.0;
constexpr int kF0Bins = 256;
constexpr int kF0UnvoicedRow = kF0Bins;  // dedicated embedding row
constexpr int kF0EmbedDim = 64;

// Per-frame fundamental frequency (0 on unvoiced frames).
struct F0Contour {
  std::vector<float> f0_hz;
  std::vector<uint8_t> voiced;

  size_t frames() const { return f0_hz.size(); }
  int voiced_count() const;
  double voiced_mean_hz() const;  // InsufficientVoicing when fully unvoiced
};

// Raises the source contour by the difference of voiced means so the result
// matches the target's average pitch while keeping the source dynamics.
// Voiced frames are clamped to >= kF0MinHz; unvoiced frames stay 0.
F0Contour shift_f0(const F0Contour& source, const F0Contour& target);

// Log-spaced bin over [kF0MinHz, kF0MaxHz], clamped to [0, kF0Bins-1].
int f0_bin(double hz);

// Embedding row per frame: f0_bin for voiced frames, the unvoiced row else.
std::vector<int> f0_embedding_rows(const F0Contour& contour);

}  // namespace svc::features
