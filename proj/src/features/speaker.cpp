#include "features/speaker.hpp"

#include "common/error.hpp"
#include "kernels/kernels.hpp"

namespace svc::features {

int build_speaker_graph(nn::Tape<float>& tp, int mel, int w, int b) {
  int mean = tp.row_mean(mel);                                   // (80,1)
  int centered = tp.add(mel, tp.scale(mean, -1.0f));             // col broadcast
  int var = tp.row_mean(tp.mul(centered, centered));             // (80,1)
  int stddev = tp.sqrt_op(tp.add_scalar(var, 1e-5f));
  int stats = tp.concat_rows({mean, stddev});                    // (160,1)
  int e = tp.add(tp.matmul(w, stats), b);                        // (256,1)
  int norm = tp.sqrt_op(tp.add_scalar(tp.sum_all(tp.mul(e, e)), 1e-12f));
  return tp.div(e, norm);
}

std::vector<float> mel_channels_major(const dsp::MelSpectrogram& mel) {
  std::vector<float> out(size_t(mel.mel_bands) * mel.frames);
  for (int t = 0; t < mel.frames; ++t)
    for (int b = 0; b < mel.mel_bands; ++b)
      out[size_t(b) * mel.frames + t] = mel.at(t, b);
  return out;
}

SpeakerEmbedding embed_speaker(const dsp::MelSpectrogram& mel, const nn::ParamStore& params) {
  if (mel.frames < 8)
    raise(ErrorKind::InvalidInput, "speaker embedding needs at least 8 mel frames");
  nn::Tape<float> tp;
  auto cm = mel_channels_major(mel);
  int mel_id = tp.constant(nn::Shape::mat(mel.mel_bands, mel.frames), cm.data());
  int w = tp.constant(params.get("cond.speaker.w").shape, params.get("cond.speaker.w").value.data());
  int b = tp.constant(params.get("cond.speaker.b").shape, params.get("cond.speaker.b").value.data());
  int e = build_speaker_graph(tp, mel_id, w, b);
  SpeakerEmbedding out;
  out.values.assign(tp.val(e), tp.val(e) + kSpeakerDim);
  return out;
}

double cosine(const SpeakerEmbedding& a, const SpeakerEmbedding& b) {
  return kernels::dot(a.values.data(), b.values.data(), a.values.size());
}

}  // namespace svc::features
