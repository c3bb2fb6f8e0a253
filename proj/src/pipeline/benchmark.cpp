#include "pipeline/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "model/model.hpp"
#include "nn/random.hpp"

namespace svc::pipeline {

DecoderChoice decoder_choice_from_string(const std::string& s) {
  if (s == "msistft") return DecoderChoice::msistft;
  if (s == "baseline") return DecoderChoice::baseline;
  if (s == "both") return DecoderChoice::both;
  raise(ErrorKind::InvalidConfig, "decoder must be msistft, baseline or both: " + s);
}

std::string RtfReport::to_text() const {
  std::ostringstream os;
  os << "RTF over " << seconds << " s synthesized, " << runs << " timed runs\n";
  if (has_msistft) os << "  ms-istft decoder: RTF = " << msistft_rtf << "\n";
  if (has_baseline) os << "  baseline decoder: RTF = " << baseline_rtf << "\n";
  if (has_msistft && has_baseline)
    os << "  speedup: " << baseline_rtf / msistft_rtf << "x\n";
  os << "  published GPU reference for a full system of this kind: 0.048 (context only)\n";
  return os.str();
}

RtfReport benchmark_rtf(const PipelineConfig& cfg, const std::string& checkpoint,
                        double seconds, DecoderChoice choice, int runs) {
  if (seconds <= 0) raise(ErrorKind::InvalidInput, "benchmark duration must be positive");
  if (runs < 1) raise(ErrorKind::InvalidInput, "benchmark needs at least one run");

  model::Model m(cfg.to_model_config(), cfg.seed);
  if (!checkpoint.empty()) m.load_checkpoint(checkpoint);

  const int frames_per_s = cfg.sample_rate / 128;
  const int T = int(std::ceil(seconds * frames_per_s));
  const double audio_seconds = double(T) * 128.0 / cfg.sample_rate;

  std::vector<float> z(size_t(cfg.d_z) * T), spk(256);
  nn::Pcg32 rng(cfg.seed, 0xBE7CULL);
  for (auto& v : z) v = float(rng.normal());
  double norm = 0;
  for (auto& v : spk) {
    v = float(rng.normal());
    norm += double(v) * v;
  }
  for (auto& v : spk) v = float(v / std::sqrt(norm));

  auto run_decoder = [&](bool baseline) {
    auto once = [&] {
      nn::Tape<float> tp;
      int zi = tp.constant(nn::Shape::mat(cfg.d_z, T), z.data());
      int si = tp.constant(nn::Shape::mat(256, 1), spk.data());
      if (baseline) {
        model::GraphCtx ctx(tp, m.baseline_params());
        return m.build_decoder_baseline(ctx, zi, si);
      }
      model::GraphCtx ctx(tp, m.gen_params());
      return m.build_decoder_msistft(ctx, zi, si).wav;
    };
    once();  // warm-up
    auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < runs; ++r) once();
    auto stop = std::chrono::steady_clock::now();
    double wall = std::chrono::duration<double>(stop - start).count() / runs;
    return wall / audio_seconds;
  };

  RtfReport report;
  report.seconds = audio_seconds;
  report.runs = runs;
  if (choice == DecoderChoice::msistft || choice == DecoderChoice::both) {
    report.has_msistft = true;
    report.msistft_rtf = run_decoder(false);
  }
  if (choice == DecoderChoice::baseline || choice == DecoderChoice::both) {
    report.has_baseline = true;
    report.baseline_rtf = run_decoder(true);
  }
  return report;
}

}  // namespace svc::pipeline
