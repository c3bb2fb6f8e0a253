#pragma once

#include "dsp/stft.hpp"
#include "features/f0.hpp"

namespace svc::features {

struct YinConfig {
  int window = 1024;        // analysis slice per frame
  double threshold = 0.1;   // cumulative-mean-normalized difference threshold
  double fmin = kF0MinHz;
  double fmax = kF0MaxHz;
};

// One estimate per STFT frame (same frame centering as `stft`): cumulative
// mean-normalized difference with an absolute threshold and parabolic
// interpolation of the selected lag. Frames failing the threshold are
// unvoiced.
F0Contour track_f0(const dsp::AudioBuffer& audio, const dsp::StftConfig& cfg,
                   const YinConfig& yin = {});

}  // namespace svc::features
