#pragma once

#include <cstdint>
#include <string>

#include "dsp/stft.hpp"

namespace svc::pipeline {

struct ToyDataSpec {
  int speakers = 2;
  int clips_per_speaker = 8;
  double seconds = 2.0;
  uint64_t seed = 0;
};

// Band-limited harmonic "voices": per-speaker formant-like spectral
// envelopes and base pitch, per-clip pitch trajectories (vibrato + detune)
// and segment-wise formant drift standing in for phonetic content. Writes
// spk<k>_clip<i>.wav files.
void generate_toy_dataset(const std::string& dir, const ToyDataSpec& spec);

// One clip, exposed for tests and the conversion acceptance run. A negative
// detune draws the usual random per-clip detune; pass 1.0 for a clip whose
// mean pitch equals base_f0_hz exactly.
dsp::AudioBuffer synth_toy_clip(int speaker, double base_f0_hz, double seconds,
                                uint64_t seed, double detune = -1.0);

// The speakers' scripted base pitches (index 0: low voice, 1: high voice).
double toy_speaker_base_f0(int speaker);

}  // namespace svc::pipeline
