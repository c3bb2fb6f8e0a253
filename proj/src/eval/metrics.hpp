#pragma once

#include <optional>
#include <string>

#include "dsp/stft.hpp"
#include "features/f0.hpp"
#include "features/speaker.hpp"

namespace svc::eval {

// Mean absolute log-mel difference between two equal-length signals.
double mel_l1(const dsp::AudioBuffer& a, const dsp::AudioBuffer& b,
              const dsp::StftConfig& cfg, int mel_bands = 80);

struct F0RmseReport {
  double rmse_hz = 0.0;           // over frames voiced in both contours
  double voicing_agreement = 0.0; // fraction of frames with matching voicing
  int co_voiced_frames = 0;
};

// Tracks the audio and scores it against the intended contour.
F0RmseReport f0_rmse(const features::F0Contour& intended, const dsp::AudioBuffer& audio,
                     const dsp::StftConfig& cfg);

double speaker_cosine(const features::SpeakerEmbedding& a,
                      const features::SpeakerEmbedding& b);

struct MetricReport {
  std::optional<double> mel_l1;
  std::optional<double> f0_rmse_voiced_hz;
  std::optional<double> speaker_cosine;
  std::optional<double> rtf;
  std::string config_hash;
  uint64_t checkpoint_step = 0;

  // single line matching the metrics-log convention; absent fields are empty
  std::string to_csv() const;
  std::string summary() const;
};

}  // namespace svc::eval
