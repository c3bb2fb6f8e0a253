#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace svc::dsp {

constexpr int kDefaultSampleRate = 16000;

struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = kDefaultSampleRate;

  size_t size() const { return samples.size(); }
  double seconds() const { return double(samples.size()) / double(sample_rate); }
};

enum class WindowKind { hann_periodic };

struct StftConfig {
  int n_fft = 512;
  int win_length = 512;
  int hop_length = 128;
  WindowKind window = WindowKind::hann_periodic;
  bool center = true;

  // Throws InvalidConfig on violated invariants (win <= n_fft, hop divides
  // win, constant overlap-add).
  void validate() const;
  int frame_count(size_t num_samples) const;
};

std::vector<double> make_window(WindowKind kind, int length);

// Row-major frames x bins, bins = n_fft/2 + 1.
struct ComplexSpectrogram {
  int frames = 0;
  int bins = 0;
  std::vector<std::complex<double>> values;

  std::complex<double>& at(int t, int k) { return values[size_t(t) * bins + k]; }
  const std::complex<double>& at(int t, int k) const { return values[size_t(t) * bins + k]; }
  std::vector<float> magnitudes() const;  // frames x bins, row-major
};

ComplexSpectrogram stft(const AudioBuffer& audio, const StftConfig& cfg);
AudioBuffer istft(const ComplexSpectrogram& spec, const StftConfig& cfg, size_t out_len);

// Index into a signal of length `len` with reflection at both ends
// (librosa-style, edge sample not repeated).
int64_t reflect_index(int64_t i, int64_t len);

}  // namespace svc::dsp
