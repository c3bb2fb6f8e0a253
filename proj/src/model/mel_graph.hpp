#pragma once

#include <map>
#include <memory>
#include <vector>

#include "dsp/mel.hpp"
#include "dsp/stft.hpp"
#include "nn/tensor.hpp"

namespace svc::model {

// Differentiable mirror of the dsp mel pipeline: reflect-padded framing via a
// gather table, windowed DFT as two constant matmuls, magnitude, mel
// filterbank matmul, floored log. Output layout matches dsp::MelSpectrogram
// (frames x mel_bands), so references can be asserted against directly.
class MelGraph {
 public:
  MelGraph(const dsp::StftConfig& cfg, int mel_bands, int sample_rate);

  // wav: flat node of num_samples values -> (frames, mel_bands)
  int build(nn::Tape<float>& tp, int wav, int num_samples);

  int frames_for(int num_samples) const { return cfg_.frame_count(num_samples); }

 private:
  dsp::StftConfig cfg_;
  int mel_bands_;
  std::vector<float> dft_re_;  // (n_fft, bins), window folded in
  std::vector<float> dft_im_;
  std::vector<float> mel_wt_;  // (bins, mel_bands)
  std::map<int, std::shared_ptr<std::vector<int64_t>>> frame_tables_;
};

}  // namespace svc::model
