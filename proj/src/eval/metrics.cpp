#include "eval/metrics.hpp"

#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "dsp/mel.hpp"
#include "features/yin.hpp"

namespace svc::eval {

double mel_l1(const dsp::AudioBuffer& a, const dsp::AudioBuffer& b,
              const dsp::StftConfig& cfg, int mel_bands) {
  if (a.samples.size() != b.samples.size())
    raise(ErrorKind::InvalidInput, "mel_l1: length mismatch " +
                                       std::to_string(a.samples.size()) + " vs " +
                                       std::to_string(b.samples.size()));
  auto ma = dsp::mel_spectrogram(a, cfg, mel_bands);
  auto mb = dsp::mel_spectrogram(b, cfg, mel_bands);
  double acc = 0.0;
  for (size_t i = 0; i < ma.values.size(); ++i)
    acc += std::fabs(double(ma.values[i]) - double(mb.values[i]));
  return acc / double(ma.values.size());
}

F0RmseReport f0_rmse(const features::F0Contour& intended, const dsp::AudioBuffer& audio,
                     const dsp::StftConfig& cfg) {
  auto tracked = features::track_f0(audio, cfg);
  const size_t frames = std::min(intended.frames(), tracked.frames());
  if (frames == 0) raise(ErrorKind::InvalidInput, "f0_rmse: empty contours");

  F0RmseReport report;
  double acc = 0.0;
  int agree = 0;
  for (size_t t = 0; t < frames; ++t) {
    if (intended.voiced[t] == tracked.voiced[t]) ++agree;
    if (intended.voiced[t] && tracked.voiced[t]) {
      double d = double(intended.f0_hz[t]) - double(tracked.f0_hz[t]);
      acc += d * d;
      report.co_voiced_frames += 1;
    }
  }
  if (report.co_voiced_frames == 0)
    raise(ErrorKind::InsufficientVoicing, "f0_rmse: no co-voiced frames");
  report.rmse_hz = std::sqrt(acc / report.co_voiced_frames);
  report.voicing_agreement = double(agree) / double(frames);
  return report;
}

double speaker_cosine(const features::SpeakerEmbedding& a,
                      const features::SpeakerEmbedding& b) {
  return features::cosine(a, b);
}

namespace {
std::string opt_str(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", *v);
  return buf;
}
}  // namespace

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os << "mel_l1,f0_rmse_voiced,speaker_cosine,rtf,config_hash,checkpoint_step\n"
     << opt_str(mel_l1) << "," << opt_str(f0_rmse_voiced_hz) << ","
     << opt_str(speaker_cosine) << "," << opt_str(rtf) << "," << config_hash << ","
     << checkpoint_step << "\n";
  return os.str();
}

std::string MetricReport::summary() const {
  std::ostringstream os;
  os << "metrics (checkpoint step " << checkpoint_step << ")\n";
  if (mel_l1) os << "  mel L1:            " << *mel_l1 << "\n";
  if (f0_rmse_voiced_hz) os << "  F0 RMSE (voiced):  " << *f0_rmse_voiced_hz << " Hz\n";
  if (speaker_cosine) os << "  speaker cosine:    " << *speaker_cosine << "\n";
  if (rtf) os << "  RTF:               " << *rtf << "\n";
  return os.str();
}

}  // namespace svc::eval
