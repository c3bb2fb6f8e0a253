#pragma once

#include <vector>

#include "dsp/mel.hpp"
#include "nn/param_store.hpp"
#include "nn/tensor.hpp"

namespace svc::features {

constexpr int kSpeakerDim = 256;
constexpr int kSpeakerStatsDim = 2 * dsp::kDefaultMelBands;  // mean + std pooling

struct SpeakerEmbedding {
  std::vector<float> values;  // kSpeakerDim, unit L2 norm
};

// mel node (80,T) -> (256,1), mean/std pooled over time, affine map, L2
// normalized. Pooling is order-invariant over frames.
int build_speaker_graph(nn::Tape<float>& tp, int mel, int w, int b);

// Column-major copy of a mel spectrogram: (mel_bands, frames) row-major.
std::vector<float> mel_channels_major(const dsp::MelSpectrogram& mel);

// Inference path over frozen parameters; requires >= 8 mel frames.
SpeakerEmbedding embed_speaker(const dsp::MelSpectrogram& mel, const nn::ParamStore& params);

double cosine(const SpeakerEmbedding& a, const SpeakerEmbedding& b);

}  // namespace svc::features
