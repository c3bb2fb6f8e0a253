#include "features/content.hpp"

#include <cmath>
#include <cstring>

#include "common/error.hpp"
#include "features/rafe.hpp"
#include "kernels/kernels.hpp"
#include "nn/random.hpp"

namespace svc::features {

ContentProvider content_provider_from_string(const std::string& s) {
  if (s == "file") return ContentProvider::file;
  if (s == "mfcc") return ContentProvider::mfcc;
  raise(ErrorKind::InvalidConfig, "unknown content provider: " + s);
}

ContentFrames align_content(ContentFrames frames, int target_frames) {
  const int diff = target_frames - frames.frames;
  if (std::abs(diff) > 2)
    raise(ErrorKind::FeatureAlignmentError,
          "content frames " + std::to_string(frames.frames) + " vs spectrogram " +
              std::to_string(target_frames) + " (beyond +-2)");
  if (diff == 0) return frames;
  ContentFrames out;
  out.frames = target_frames;
  out.dim = frames.dim;
  out.values.resize(size_t(target_frames) * frames.dim);
  const int copy = std::min(frames.frames, target_frames);
  std::memcpy(out.values.data(), frames.values.data(), size_t(copy) * frames.dim * 4);
  for (int t = copy; t < target_frames; ++t)  // repeat the last frame
    std::memcpy(out.values.data() + size_t(t) * out.dim, frames.frame(frames.frames - 1),
                size_t(out.dim) * 4);
  return out;
}

ContentFrames content_from_file(const std::string& rafe_path, int target_frames) {
  RafeData d = read_rafe(rafe_path);
  if (d.frames == 0)
    raise(ErrorKind::FeatureFileError, "content file holds a single vector: " + rafe_path);
  if (int(d.dim) != kContentSourceDim)
    raise(ErrorKind::FeatureFileError,
          "content file dim " + std::to_string(d.dim) + ", expected 1024: " + rafe_path);
  ContentFrames frames;
  frames.frames = int(d.frames);
  frames.dim = int(d.dim);
  frames.values = std::move(d.values);
  return align_content(std::move(frames), target_frames);
}

std::vector<float> orthonormal_projection(int rows, int cols, uint64_t seed) {
  nn::Pcg32 rng(seed, 0xC0DEC0DEULL);
  std::vector<double> m(size_t(rows) * cols);
  for (auto& v : m) v = rng.normal();
  // modified Gram-Schmidt over columns
  for (int c = 0; c < cols; ++c) {
    for (int prev = 0; prev < c; ++prev) {
      double proj = 0.0;
      for (int r = 0; r < rows; ++r) proj += m[size_t(r) * cols + c] * m[size_t(r) * cols + prev];
      for (int r = 0; r < rows; ++r) m[size_t(r) * cols + c] -= proj * m[size_t(r) * cols + prev];
    }
    double norm = 0.0;
    for (int r = 0; r < rows; ++r) norm += m[size_t(r) * cols + c] * m[size_t(r) * cols + c];
    norm = std::sqrt(norm);
    for (int r = 0; r < rows; ++r) m[size_t(r) * cols + c] /= norm;
  }
  std::vector<float> out(m.size());
  for (size_t i = 0; i < m.size(); ++i) out[i] = float(m[i]);
  return out;
}

ContentFrames content_mfcc(const dsp::AudioBuffer& audio, const dsp::StftConfig& cfg,
                           uint64_t seed) {
  constexpr int kCoeffs = 13;
  constexpr int kFeatDim = 2 * kCoeffs;

  auto mel = dsp::mel_spectrogram(audio, cfg, dsp::kDefaultMelBands);
  const int T = mel.frames;
  const int B = mel.mel_bands;

  // DCT-II of the log-mel rows
  std::vector<float> mfcc(size_t(T) * kCoeffs);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < kCoeffs; ++i) {
      double acc = 0.0;
      for (int b = 0; b < B; ++b)
        acc += double(mel.at(t, b)) * std::cos(M_PI * i * (2.0 * b + 1.0) / (2.0 * B));
      mfcc[size_t(t) * kCoeffs + i] = float(acc / B);
    }
  }

  // first differences appended
  std::vector<float> feat(size_t(T) * kFeatDim, 0.0f);
  for (int t = 0; t < T; ++t) {
    std::memcpy(feat.data() + size_t(t) * kFeatDim, mfcc.data() + size_t(t) * kCoeffs,
                kCoeffs * 4);
    if (t > 0)
      for (int i = 0; i < kCoeffs; ++i)
        feat[size_t(t) * kFeatDim + kCoeffs + i] =
            mfcc[size_t(t) * kCoeffs + i] - mfcc[size_t(t - 1) * kCoeffs + i];
  }

  // lift to the content dimensionality through a fixed orthonormal basis
  auto proj = orthonormal_projection(kContentSourceDim, kFeatDim, seed);
  ContentFrames out;
  out.frames = T;
  out.dim = kContentSourceDim;
  out.values.assign(size_t(T) * kContentSourceDim, 0.0f);
  for (int t = 0; t < T; ++t) {
    const float* f = feat.data() + size_t(t) * kFeatDim;
    float* dst = out.values.data() + size_t(t) * kContentSourceDim;
    for (int r = 0; r < kContentSourceDim; ++r) {
      double acc = 0.0;
      for (int c = 0; c < kFeatDim; ++c) acc += double(proj[size_t(r) * kFeatDim + c]) * f[c];
      dst[r] = float(acc);
    }
  }
  return out;
}

}  // namespace svc::features
