#pragma once

#include <string>

#include "pipeline/config.hpp"

namespace svc::pipeline {

enum class DecoderChoice { msistft, baseline, both };

DecoderChoice decoder_choice_from_string(const std::string& s);

struct RtfReport {
  double seconds = 0.0;  // audio synthesized per run
  int runs = 0;
  bool has_msistft = false;
  bool has_baseline = false;
  double msistft_rtf = 0.0;
  double baseline_rtf = 0.0;

  std::string to_text() const;
};

// Synthesizes `seconds` of audio from seeded random latents through the
// chosen decoder(s), wall-clock timed after one warm-up pass and averaged
// over `runs` passes. RTF = synthesis_seconds / audio_seconds.
RtfReport benchmark_rtf(const PipelineConfig& cfg, const std::string& checkpoint,
                        double seconds, DecoderChoice choice, int runs = 5);

}  // namespace svc::pipeline
