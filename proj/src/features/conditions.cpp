#include "features/conditions.hpp"

#include "common/error.hpp"

namespace svc::features {

using nn::Shape;

void register_condition_params(nn::ParamStore& store, const ConditionDims& dims,
                               nn::Pcg32& rng) {
  store.add_kaiming("cond.content_prenet.w", Shape::mat(dims.content, dims.content_in),
                    dims.content_in, rng);
  store.add("cond.content_prenet.b", Shape::mat(dims.content, 1));
  store.add_normal("cond.f0_embed.table", Shape::mat(kF0Bins + 1, dims.f0), 0.1f, rng);
  store.add_kaiming("cond.speaker.w", Shape::mat(dims.speaker, kSpeakerStatsDim),
                    kSpeakerStatsDim, rng);
  store.add("cond.speaker.b", Shape::mat(dims.speaker, 1));
}

ConditionParamIds bind_condition_params(nn::Tape<float>& tp, nn::ParamStore& store,
                                        nn::ParamBinder* binder) {
  auto bind = [&](const char* name) {
    return binder ? binder->bind(store.get(name))
                  : tp.constant(store.get(name).shape, store.get(name).value.data());
  };
  ConditionParamIds ids;
  ids.content_w = bind("cond.content_prenet.w");
  ids.content_b = bind("cond.content_prenet.b");
  ids.f0_table = bind("cond.f0_embed.table");
  ids.speaker_w = bind("cond.speaker.w");
  ids.speaker_b = bind("cond.speaker.b");
  return ids;
}

int build_content_prenet(nn::Tape<float>& tp, int raw_content, const ConditionParamIds& ids) {
  return tp.add(tp.matmul(ids.content_w, raw_content), ids.content_b);
}

int build_f0_channels(nn::Tape<float>& tp, const ConditionParamIds& ids,
                      const std::vector<int>& rows) {
  auto shared = std::make_shared<std::vector<int>>(rows);
  return tp.gather_cols(ids.f0_table, shared);
}

ConditionGraph assemble_conditions(nn::Tape<float>& tp, int content, int speaker,
                                   int emotion, int f0_channels) {
  const int T = tp.shape(content).cols();
  if (tp.shape(f0_channels).cols() != T)
    raise(ErrorKind::FeatureAlignmentError,
          "condition frame mismatch: content " + std::to_string(T) + " vs f0 " +
              std::to_string(tp.shape(f0_channels).cols()));
  int spk_b = tp.broadcast_cols(speaker, T);
  int emo_b = tp.broadcast_cols(emotion, T);
  ConditionGraph g;
  g.cond = tp.concat_rows({content, spk_b, emo_b, f0_channels});
  g.speaker = speaker;
  g.frames = T;
  return g;
}

std::vector<float> content_channels_major(const ContentFrames& c) {
  std::vector<float> out(size_t(c.dim) * c.frames);
  for (int t = 0; t < c.frames; ++t)
    for (int d = 0; d < c.dim; ++d) out[size_t(d) * c.frames + t] = c.frame(t)[d];
  return out;
}

}  // namespace svc::features
