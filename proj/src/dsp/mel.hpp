#pragma once

#include <vector>

#include "dsp/stft.hpp"

namespace svc::dsp {

constexpr int kDefaultMelBands = 80;
constexpr double kMelAmplitudeFloor = 1e-5;

// Row-major frames x mel_bands, log-amplitude.
struct MelSpectrogram {
  int frames = 0;
  int mel_bands = 0;
  std::vector<float> values;

  float& at(int t, int b) { return values[size_t(t) * mel_bands + b]; }
  float at(int t, int b) const { return values[size_t(t) * mel_bands + b]; }
};

// Triangular filterbank on the Slaney mel scale (linear below 1 kHz, log
// above), area-normalized. The first and last triangles are widened by one
// mel step past the band edges so every FFT bin in [0, Nyquist] carries
// weight.
struct MelFilterbank {
  int mel_bands = 0;
  int fft_bins = 0;
  // dense row-major mel_bands x fft_bins
  std::vector<double> weights;
  std::vector<double> center_hz;  // band centers, for tests/diagnostics

  double weight(int band, int bin) const { return weights[size_t(band) * fft_bins + bin]; }
};

MelFilterbank make_mel_filterbank(int mel_bands, int n_fft, int sample_rate,
                                  double fmin_hz, double fmax_hz);

double hz_to_mel_slaney(double hz);
double mel_to_hz_slaney(double mel);

MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const StftConfig& cfg,
                               int mel_bands = kDefaultMelBands);
MelSpectrogram mel_from_spectrogram(const ComplexSpectrogram& spec, const MelFilterbank& fb);

}  // namespace svc::dsp
