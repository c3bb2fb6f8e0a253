#include "dsp/stft.hpp"

#include <cmath>

#include "common/error.hpp"
#include "dsp/fft.hpp"

namespace svc::dsp {

std::vector<double> make_window(WindowKind kind, int length) {
  std::vector<double> w(length);
  switch (kind) {
    case WindowKind::hann_periodic:
      for (int i = 0; i < length; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * double(i) / double(length)));
      break;
  }
  return w;
}

void StftConfig::validate() const {
  if (n_fft <= 0 || (n_fft & (n_fft - 1)) != 0)
    raise(ErrorKind::InvalidConfig, "n_fft must be a positive power of two");
  if (win_length <= 0 || win_length > n_fft)
    raise(ErrorKind::InvalidConfig, "win_length must be in (0, n_fft]");
  if (hop_length <= 0 || win_length % hop_length != 0)
    raise(ErrorKind::InvalidConfig, "hop_length must divide win_length");
  // Constant overlap-add of the squared window: reconstruction needs the
  // shifted window-square sum to be bounded away from zero at every offset.
  auto w = make_window(window, win_length);
  for (int ofs = 0; ofs < hop_length; ++ofs) {
    double s = 0.0;
    for (int j = ofs; j < win_length; j += hop_length) s += w[j] * w[j];
    if (s < 1e-8)
      raise(ErrorKind::InvalidConfig, "window/hop pair violates overlap-add coverage");
  }
}

int StftConfig::frame_count(size_t num_samples) const {
  if (!center)
    return num_samples >= size_t(win_length)
               ? 1 + int((num_samples - win_length) / hop_length)
               : 0;
  return 1 + int(num_samples / size_t(hop_length));
}

int64_t reflect_index(int64_t i, int64_t len) {
  if (len == 1) return 0;
  const int64_t period = 2 * (len - 1);
  i = i % period;
  if (i < 0) i += period;
  return i < len ? i : period - i;
}

std::vector<float> ComplexSpectrogram::magnitudes() const {
  std::vector<float> mag(values.size());
  for (size_t i = 0; i < values.size(); ++i) mag[i] = float(std::abs(values[i]));
  return mag;
}

ComplexSpectrogram stft(const AudioBuffer& audio, const StftConfig& cfg) {
  if (audio.samples.empty()) raise(ErrorKind::InvalidInput, "stft: empty audio");
  cfg.validate();

  const int64_t len = int64_t(audio.samples.size());
  const int frames = cfg.frame_count(audio.samples.size());
  const int bins = cfg.n_fft / 2 + 1;
  const auto window = make_window(cfg.window, cfg.win_length);
  const int pad = cfg.center ? cfg.n_fft / 2 : 0;
  // win_length < n_fft: window is centered inside the FFT buffer
  const int wofs = (cfg.n_fft - cfg.win_length) / 2;

  Fft fft(cfg.n_fft);
  ComplexSpectrogram out;
  out.frames = frames;
  out.bins = bins;
  out.values.resize(size_t(frames) * bins);

  std::vector<std::complex<double>> buf(cfg.n_fft);
  for (int t = 0; t < frames; ++t) {
    const int64_t start = int64_t(t) * cfg.hop_length - pad;
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (int j = 0; j < cfg.win_length; ++j) {
      int64_t src = start + wofs + j;
      double v = cfg.center ? double(audio.samples[reflect_index(src, len)])
                            : (src >= 0 && src < len ? double(audio.samples[src]) : 0.0);
      buf[wofs + j] = window[j] * v;
    }
    fft.forward(buf.data());
    for (int k = 0; k < bins; ++k) out.at(t, k) = buf[k];
    // real input: DC and Nyquist are exactly real
    out.at(t, 0).imag(0.0);
    out.at(t, bins - 1).imag(0.0);
  }
  return out;
}

AudioBuffer istft(const ComplexSpectrogram& spec, const StftConfig& cfg, size_t out_len) {
  cfg.validate();
  if (spec.bins != cfg.n_fft / 2 + 1)
    raise(ErrorKind::InvalidInput, "istft: spectrogram bin count does not match config");

  const auto window = make_window(cfg.window, cfg.win_length);
  const int pad = cfg.center ? cfg.n_fft / 2 : 0;
  const int wofs = (cfg.n_fft - cfg.win_length) / 2;
  const int64_t total = int64_t(spec.frames - 1) * cfg.hop_length + cfg.n_fft;

  Fft fft(cfg.n_fft);
  std::vector<double> acc(std::max<int64_t>(total, 1), 0.0);
  std::vector<double> norm(acc.size(), 0.0);
  std::vector<std::complex<double>> buf(cfg.n_fft);

  for (int t = 0; t < spec.frames; ++t) {
    for (int k = 0; k < spec.bins; ++k) buf[k] = spec.at(t, k);
    for (int k = spec.bins; k < cfg.n_fft; ++k) buf[k] = std::conj(spec.at(t, cfg.n_fft - k));
    fft.inverse(buf.data());
    const int64_t base = int64_t(t) * cfg.hop_length;
    for (int j = 0; j < cfg.win_length; ++j) {
      acc[base + wofs + j] += window[j] * buf[wofs + j].real();
      norm[base + wofs + j] += window[j] * window[j];
    }
  }

  AudioBuffer out;
  out.sample_rate = kDefaultSampleRate;
  out.samples.assign(out_len, 0.0f);
  for (size_t n = 0; n < out_len; ++n) {
    int64_t p = int64_t(n) + pad;
    if (p >= total) break;
    if (norm[p] < 1e-10) {
      // no window energy reaches this sample; it carries no information
      if (std::abs(acc[p]) > 1e-12)
        raise(ErrorKind::NumericalError,
              "istft: zero overlap-add normalization at sample " + std::to_string(n));
      out.samples[n] = 0.0f;
      continue;
    }
    out.samples[n] = float(acc[p] / norm[p]);
  }
  return out;
}

}  // namespace svc::dsp
