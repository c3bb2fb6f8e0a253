#include "pipeline/toy_data.hpp"

#include <cmath>
#include <filesystem>

#include "common/error.hpp"
#include "dsp/wav.hpp"
#include "nn/random.hpp"

namespace svc::pipeline {

namespace {

struct SpeakerVoice {
  double base_f0;
  double formants[3];
  double widths[3];
  double tilt;  // spectral rolloff exponent
};

SpeakerVoice speaker_voice(int speaker) {
  // two timbre templates, far apart in both pitch and envelope; kept
  // spectrally sparse so the harmonic set stays small
  if (speaker % 2 == 0) return {220.0, {420.0, 1250.0, 2300.0}, {140.0, 220.0, 320.0}, 1.0};
  return {330.0, {700.0, 1800.0, 2900.0}, {170.0, 260.0, 360.0}, 0.9};
}

}  // namespace

double toy_speaker_base_f0(int speaker) { return speaker_voice(speaker).base_f0; }

dsp::AudioBuffer synth_toy_clip(int speaker, double base_f0_hz, double seconds,
                                uint64_t seed, double detune) {
  const int sr = dsp::kDefaultSampleRate;
  const size_t n = size_t(seconds * sr);
  const SpeakerVoice voice = speaker_voice(speaker);
  nn::Pcg32 rng(seed, 0x70F0ULL + speaker);

  const double drawn = rng.uniform(0.97, 1.03);
  if (detune < 0.0) detune = drawn;
  const double vib_rate = rng.uniform(4.5, 6.0);
  const double vib_depth = rng.uniform(0.015, 0.03);
  const double vib_phase = rng.uniform(0.0, 2.0 * M_PI);

  // four "phoneme" segments re-weighting the formants
  const int segs = 4;
  double seg_w[segs][3];
  for (auto& row : seg_w) {
    double total = 0;
    for (double& w : row) {
      w = rng.uniform(0.35, 1.0);
      total += w;
    }
    for (double& w : row) w /= total;
  }

  dsp::AudioBuffer out;
  out.sample_rate = sr;
  out.samples.resize(n);

  const int max_harmonics = int(3600.0 / (base_f0_hz * 0.96));
  std::vector<double> phases(max_harmonics + 1, 0.0);
  for (auto& p : phases) p = rng.uniform(0.0, 2.0 * M_PI);

  double peak = 0.0;
  std::vector<double> raw(n);
  double f0_phase = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double t = double(i) / sr;
    const double f0 = base_f0_hz * detune *
                      (1.0 + vib_depth * std::sin(2.0 * M_PI * vib_rate * t + vib_phase));
    f0_phase += 2.0 * M_PI * f0 / sr;
    const int seg = std::min(int(t / seconds * segs), segs - 1);
    const double seg_pos = t / seconds * segs - seg;
    const int seg2 = std::min(seg + 1, segs - 1);

    double s = 0.0;
    for (int h = 1; h <= max_harmonics; ++h) {
      const double fh = h * f0;
      if (fh > 3800.0) break;
      double env = 0.0;
      for (int f = 0; f < 3; ++f) {
        const double w = (1.0 - seg_pos) * seg_w[seg][f] + seg_pos * seg_w[seg2][f];
        const double d = (fh - voice.formants[f]) / voice.widths[f];
        env += w * std::exp(-0.5 * d * d);
      }
      env += 0.05;  // floor keeps low harmonics present
      s += env / std::pow(double(h), voice.tilt) * std::sin(h * f0_phase + phases[h]);
    }
    // soft attack/release so clip edges are not clicks
    const double fade = std::min({1.0, t / 0.04, (seconds - t) / 0.04});
    raw[i] = s * fade;
    peak = std::max(peak, std::fabs(raw[i]));
  }

  nn::Pcg32 noise_rng(seed ^ 0x9E3779B97F4A7C15ULL);
  const double gain = peak > 0 ? 0.6 / peak : 0.0;
  for (size_t i = 0; i < n; ++i)
    out.samples[i] = float(raw[i] * gain + 0.002 * noise_rng.normal());
  return out;
}

void generate_toy_dataset(const std::string& dir, const ToyDataSpec& spec) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorKind::InvalidInput, "cannot create dataset dir: " + dir);

  for (int s = 0; s < spec.speakers; ++s) {
    for (int c = 0; c < spec.clips_per_speaker; ++c) {
      uint64_t clip_seed = spec.seed * 1000003ULL + uint64_t(s) * 101ULL + uint64_t(c);
      auto audio = synth_toy_clip(s, toy_speaker_base_f0(s), spec.seconds, clip_seed);
      char name[64];
      std::snprintf(name, sizeof(name), "spk%d_clip%02d.wav", s, c);
      dsp::write_wav((fs::path(dir) / name).string(), audio);
    }
  }
}

}  // namespace svc::pipeline
