#include "dsp/mel.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace svc::dsp {

namespace {
constexpr double kMelBreakHz = 1000.0;
constexpr double kMelBreak = 15.0;            // mels at 1 kHz: 1000 / (200/3)
constexpr double kLinStepHz = 200.0 / 3.0;    // Hz per mel below the break
const double kLogStep = std::log(6.4) / 27.0; // log-spacing above the break
}  // namespace

double hz_to_mel_slaney(double hz) {
  if (hz < kMelBreakHz) return hz / kLinStepHz;
  return kMelBreak + std::log(hz / kMelBreakHz) / kLogStep;
}

double mel_to_hz_slaney(double mel) {
  if (mel < kMelBreak) return mel * kLinStepHz;
  return kMelBreakHz * std::exp(kLogStep * (mel - kMelBreak));
}

MelFilterbank make_mel_filterbank(int mel_bands, int n_fft, int sample_rate,
                                  double fmin_hz, double fmax_hz) {
  if (mel_bands < 1) raise(ErrorKind::InvalidConfig, "mel_bands must be >= 1");
  if (fmax_hz > sample_rate / 2.0 + 1e-9)
    raise(ErrorKind::InvalidConfig, "mel fmax above Nyquist");

  const int bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel_slaney(fmin_hz);
  const double mel_hi = hz_to_mel_slaney(fmax_hz);
  const double step = (mel_hi - mel_lo) / double(mel_bands + 1);

  // edge frequencies f[0..mel_bands+1]; band i spans (f[i], f[i+2])
  std::vector<double> edges(mel_bands + 2);
  for (int i = 0; i < mel_bands + 2; ++i) edges[i] = mel_to_hz_slaney(mel_lo + step * i);
  // widen the end triangles so the DC and Nyquist bins get nonzero weight
  edges.front() = mel_to_hz_slaney(mel_lo - step);
  edges.back() = mel_to_hz_slaney(mel_hi + step);

  MelFilterbank fb;
  fb.mel_bands = mel_bands;
  fb.fft_bins = bins;
  fb.weights.assign(size_t(mel_bands) * bins, 0.0);
  fb.center_hz.resize(mel_bands);

  for (int b = 0; b < mel_bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    fb.center_hz[b] = mid;
    const double area_norm = 2.0 / (hi - lo);
    for (int k = 0; k < bins; ++k) {
      const double f = double(k) * sample_rate / double(n_fft);
      double w = 0.0;
      if (f > lo && f < hi) w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      fb.weights[size_t(b) * bins + k] = w * area_norm;
    }
  }
  return fb;
}

MelSpectrogram mel_from_spectrogram(const ComplexSpectrogram& spec, const MelFilterbank& fb) {
  if (spec.bins != fb.fft_bins)
    raise(ErrorKind::InvalidInput, "mel: spectrogram bins do not match filterbank");
  MelSpectrogram out;
  out.frames = spec.frames;
  out.mel_bands = fb.mel_bands;
  out.values.resize(size_t(spec.frames) * fb.mel_bands);
  std::vector<double> mag(spec.bins);
  for (int t = 0; t < spec.frames; ++t) {
    for (int k = 0; k < spec.bins; ++k) mag[k] = std::abs(spec.at(t, k));
    for (int b = 0; b < fb.mel_bands; ++b) {
      double acc = 0.0;
      const double* w = fb.weights.data() + size_t(b) * fb.fft_bins;
      for (int k = 0; k < spec.bins; ++k) acc += w[k] * mag[k];
      out.at(t, b) = float(std::log(std::max(acc, kMelAmplitudeFloor)));
    }
  }
  return out;
}

MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const StftConfig& cfg, int mel_bands) {
  auto spec = stft(audio, cfg);
  auto fb = make_mel_filterbank(mel_bands, cfg.n_fft, audio.sample_rate, 0.0,
                                audio.sample_rate / 2.0);
  return mel_from_spectrogram(spec, fb);
}

}  // namespace svc::dsp
