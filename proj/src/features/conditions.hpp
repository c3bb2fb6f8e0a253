#pragma once

#include <vector>

#include "features/content.hpp"
#include "features/emotion.hpp"
#include "features/f0.hpp"
#include "features/speaker.hpp"
#include "nn/param_store.hpp"
#include "nn/tensor.hpp"

namespace svc::features {

// Channel layout of the conditioning matrix, in fixed order:
// [content 192 | speaker 256 | emotion 256 | f0 64] = 768 rows.
struct ConditionDims {
  int content_in = kContentSourceDim;  // 1024
  int content = 192;
  int speaker = kSpeakerDim;  // 256
  int emotion = kEmotionDim;  // 256
  int f0 = kF0EmbedDim;       // 64

  int total() const { return content + speaker + emotion + f0; }
  int content_row0() const { return 0; }
  int speaker_row0() const { return content; }
  int emotion_row0() const { return content + speaker; }
  int f0_row0() const { return content + speaker + emotion; }
};

// Trainable pieces of the conditioning path (content pre-net, f0 embedding
// table, speaker embedder affine).
void register_condition_params(nn::ParamStore& store, const ConditionDims& dims,
                               nn::Pcg32& rng);

struct ConditionParamIds {
  int content_w = -1, content_b = -1, f0_table = -1, speaker_w = -1, speaker_b = -1;
};

// binder == nullptr binds frozen constants (inference).
ConditionParamIds bind_condition_params(nn::Tape<float>& tp, nn::ParamStore& store,
                                        nn::ParamBinder* binder);

// raw (1024,T) -> (192,T)
int build_content_prenet(nn::Tape<float>& tp, int raw_content, const ConditionParamIds& ids);

// embedding rows per frame -> (64,T)
int build_f0_channels(nn::Tape<float>& tp, const ConditionParamIds& ids,
                      const std::vector<int>& rows);

struct ConditionGraph {
  int cond = -1;     // (768,T)
  int speaker = -1;  // (256,1)
  int frames = 0;
};

// content (192,T) + speaker (256,1) + emotion (256,1 constant) + f0 (64,T),
// utterance-level vectors broadcast across frames, concatenated channelwise.
ConditionGraph assemble_conditions(nn::Tape<float>& tp, int content, int speaker,
                                   int emotion, int f0_channels);

// Column-major copy of raw content frames: (1024, T).
std::vector<float> content_channels_major(const ContentFrames& c);

}  // namespace svc::features
