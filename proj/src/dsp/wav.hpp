#pragma once

#include <string>

#include "dsp/stft.hpp"

namespace svc::dsp {

// RIFF/WAVE, PCM16 little-endian, mono only. The reader rejects any other
// layout and any sample rate other than 16 kHz (no resampling here).
AudioBuffer read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioBuffer& audio);

}  // namespace svc::dsp
