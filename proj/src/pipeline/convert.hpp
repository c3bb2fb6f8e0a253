#pragma once

#include <string>

#include "dsp/stft.hpp"
#include "features/f0.hpp"
#include "pipeline/config.hpp"

namespace svc::pipeline {

struct ConvertResult {
  dsp::AudioBuffer audio;
  features::F0Contour shifted_f0;  // the contour the output was conditioned on
  int frames = 0;
  bool peak_normalized = false;
  uint64_t checkpoint_step = 0;
};

// Content and emotion come from the source, timbre from the target, pitch
// from the shifted source contour. Samples the conditional prior at
// cfg.noise_scale and inverts the flow. Writes out_wav unless empty.
ConvertResult convert(const PipelineConfig& cfg, const std::string& checkpoint,
                      const std::string& source_wav, const std::string& target_wav,
                      const std::string& out_wav);

}  // namespace svc::pipeline
