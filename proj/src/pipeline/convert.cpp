#include "pipeline/convert.hpp"

#include <cmath>
#include <filesystem>

#include "common/error.hpp"
#include "dsp/mel.hpp"
#include "dsp/wav.hpp"
#include "features/conditions.hpp"
#include "features/yin.hpp"
#include "model/model.hpp"

namespace svc::pipeline {

ConvertResult convert(const PipelineConfig& cfg, const std::string& checkpoint,
                      const std::string& source_wav, const std::string& target_wav,
                      const std::string& out_wav) {
  model::Model m(cfg.to_model_config(), cfg.seed);
  const uint64_t step = m.load_checkpoint(checkpoint);

  auto source = dsp::read_wav(source_wav);
  auto target = dsp::read_wav(target_wav);
  const int T = cfg.stft.frame_count(source.samples.size());

  // pitch: source dynamics shifted to the target's average
  auto f0_src = features::track_f0(source, cfg.stft);
  auto f0_tgt = features::track_f0(target, cfg.stft);
  auto shifted = features::shift_f0(f0_src, f0_tgt);
  auto rows = features::f0_embedding_rows(shifted);

  // content from the source
  features::ContentFrames content_raw;
  if (cfg.content_provider == "file") {
    auto side = std::filesystem::path(source_wav).replace_extension(".content.rafe");
    content_raw = features::content_from_file(side.string(), T);
  } else {
    content_raw = features::content_mfcc(source, cfg.stft, cfg.seed);
  }

  auto emotion = features::embed_emotion(cfg.emotion_file, cfg.seed);
  auto target_mel = dsp::mel_spectrogram(target, cfg.stft, cfg.mel_bands);

  nn::Tape<float> tp;
  model::GraphCtx ctx(tp, m.gen_params());
  auto cond_ids = features::bind_condition_params(tp, m.gen_params(), nullptr);

  auto content_cm = features::content_channels_major(content_raw);
  int content = features::build_content_prenet(
      tp, tp.constant(nn::Shape::mat(content_raw.dim, T), content_cm.data()), cond_ids);

  auto mel_cm = features::mel_channels_major(target_mel);
  int speaker = features::build_speaker_graph(
      tp, tp.constant(nn::Shape::mat(target_mel.mel_bands, target_mel.frames), mel_cm.data()),
      cond_ids.speaker_w, cond_ids.speaker_b);

  int emo = tp.constant(nn::Shape::mat(int(emotion.size()), 1), emotion.data());
  int f0ch = features::build_f0_channels(tp, cond_ids, rows);
  auto cg = features::assemble_conditions(tp, content, speaker, emo, f0ch);

  auto prior = m.build_prior(ctx, cg.cond);
  int z_p = m.reparameterize(tp, prior, cfg.seed ^ 0xC0577FULL, cfg.noise_scale);
  int z = m.build_flow_inverse(ctx, z_p, cg.cond);
  auto dec = m.build_decoder_msistft(ctx, z, speaker);

  ConvertResult result;
  result.frames = T;
  result.checkpoint_step = step;
  result.shifted_f0 = std::move(shifted);
  result.audio.sample_rate = cfg.sample_rate;
  const float* wav = tp.val(dec.wav);
  const size_t n = tp.shape(dec.wav).numel();
  result.audio.samples.assign(wav, wav + n);

  float peak = kernels::max_abs(result.audio.samples.data(), n);
  if (peak > 1.0f) {
    const float gain = 0.891251f / peak;  // -1 dBFS
    kernels::scale(result.audio.samples.data(), result.audio.samples.data(), gain, n);
    result.peak_normalized = true;
  }

  if (!out_wav.empty()) dsp::write_wav(out_wav, result.audio);
  return result;
}

}  // namespace svc::pipeline
