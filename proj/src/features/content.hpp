#pragma once

#include <string>
#include <vector>

#include "dsp/mel.hpp"
#include "dsp/stft.hpp"

namespace svc::features {

constexpr int kContentSourceDim = 1024;

enum class ContentProvider { file, mfcc };

ContentProvider content_provider_from_string(const std::string& s);

// Frame-aligned content features before the trainable pre-net, frames x 1024
// row-major.
struct ContentFrames {
  int frames = 0;
  int dim = kContentSourceDim;
  std::vector<float> values;

  const float* frame(int t) const { return values.data() + size_t(t) * dim; }
};

// Loads an external 1024-dim dump and aligns it to `target_frames`:
// differences up to +-2 frames are edge-padded/truncated, anything larger is
// a FeatureAlignmentError (silently resampling would hide upstream bugs).
ContentFrames content_from_file(const std::string& rafe_path, int target_frames);

ContentFrames align_content(ContentFrames frames, int target_frames);

// Built-in deterministic stand-in: 13 MFCCs plus first differences per frame,
// mapped to 1024 dims through a seed-fixed orthonormal projection.
ContentFrames content_mfcc(const dsp::AudioBuffer& audio, const dsp::StftConfig& cfg,
                           uint64_t seed);

// Seed-fixed projection matrix with orthonormal columns, rows x cols
// (rows >= cols).
std::vector<float> orthonormal_projection(int rows, int cols, uint64_t seed);

}  // namespace svc::features
