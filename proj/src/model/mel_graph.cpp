#include "model/mel_graph.hpp"

#include <cmath>

namespace svc::model {

using nn::Shape;

MelGraph::MelGraph(const dsp::StftConfig& cfg, int mel_bands, int sample_rate)
    : cfg_(cfg), mel_bands_(mel_bands) {
  const int n = cfg.n_fft;
  const int bins = n / 2 + 1;
  auto w = dsp::make_window(cfg.window, cfg.win_length);

  dft_re_.resize(size_t(n) * bins);
  dft_im_.resize(size_t(n) * bins);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < bins; ++k) {
      double ang = -2.0 * M_PI * double(j) * k / double(n);
      dft_re_[size_t(j) * bins + k] = float(w[j] * std::cos(ang));
      dft_im_[size_t(j) * bins + k] = float(w[j] * std::sin(ang));
    }
  }

  auto fb = dsp::make_mel_filterbank(mel_bands, n, sample_rate, 0.0, sample_rate / 2.0);
  mel_wt_.resize(size_t(bins) * mel_bands);
  for (int k = 0; k < bins; ++k)
    for (int b = 0; b < mel_bands; ++b)
      mel_wt_[size_t(k) * mel_bands + b] = float(fb.weight(b, k));
}

int MelGraph::build(nn::Tape<float>& tp, int wav, int num_samples) {
  const int n = cfg_.n_fft;
  const int bins = n / 2 + 1;
  const int frames = cfg_.frame_count(num_samples);

  auto& table = frame_tables_[num_samples];
  if (!table) {
    table = std::make_shared<std::vector<int64_t>>(size_t(frames) * n);
    for (int t = 0; t < frames; ++t)
      for (int j = 0; j < n; ++j)
        (*table)[size_t(t) * n + j] =
            dsp::reflect_index(int64_t(t) * cfg_.hop_length - n / 2 + j, num_samples);
  }

  int framed = tp.take(wav, table, Shape::mat(frames, n));  // (T, n_fft)
  int re_mat = tp.constant(Shape::mat(n, bins), dft_re_.data());
  int im_mat = tp.constant(Shape::mat(n, bins), dft_im_.data());
  int re = tp.matmul(framed, re_mat);  // (T, bins)
  int im = tp.matmul(framed, im_mat);
  int power = tp.add(tp.mul(re, re), tp.mul(im, im));
  int mag = tp.sqrt_op(tp.add_scalar(power, 1e-9f));
  int melw = tp.constant(Shape::mat(bins, mel_bands_), mel_wt_.data());
  int mel_energy = tp.matmul(mag, melw);  // (T, mel_bands)
  return tp.log_op(tp.clamp(mel_energy, float(dsp::kMelAmplitudeFloor), 3.0e38f));
}

}  // namespace svc::model
