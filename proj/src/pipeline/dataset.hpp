#pragma once

#include <string>
#include <vector>

#include "dsp/mel.hpp"
#include "features/content.hpp"
#include "features/f0.hpp"
#include "pipeline/config.hpp"

namespace svc::pipeline {

// One utterance with all frame-aligned cached features.
struct UtteranceRecord {
  std::string id;
  std::string wav_path;
  std::string speaker_label;  // filename prefix, toy bookkeeping only
  int frames = 0;
  size_t num_samples = 0;

  std::vector<float> audio;        // mono samples
  std::vector<float> lin_mag;      // (bins, frames) channels-major
  dsp::MelSpectrogram mel;         // frames x bands
  features::F0Contour f0;
  features::ContentFrames content; // frames x 1024
  std::vector<float> emotion;      // 256, zero unless a sidecar file exists
};

struct ExtractFailure {
  std::string path;
  std::string message;
};

struct ExtractResult {
  std::vector<UtteranceRecord> records;
  std::vector<ExtractFailure> failures;
  int cache_hits = 0;
  int cache_misses = 0;
};

// Runs dsp + feature extraction once per WAV in `wav_dir`, writing RAFE
// caches under <wav_dir>/cache and skipping up-to-date entries by content
// hash. Unreadable files become failures; the batch continues.
ExtractResult extract_features(const PipelineConfig& cfg, const std::string& wav_dir);

// Cache-key fingerprint of the extraction-relevant config fields.
std::string extraction_fingerprint(const PipelineConfig& cfg);

}  // namespace svc::pipeline
