#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dsp/stft.hpp"
#include "model/model.hpp"
#include "nn/adam.hpp"

namespace svc::pipeline {

// Loaded from a UTF-8 `key = value` file with `#` comments and dotted keys.
// Unknown keys are errors; every value is validated at load.
struct PipelineConfig {
  int sample_rate = 16000;
  uint64_t seed = 0;

  dsp::StftConfig stft;
  int mel_bands = 80;

  int d_z = 192;
  int hidden = 192;
  int posterior_layers = 8;
  int flow_blocks = 4;
  int flow_layers = 2;
  int prior_layers = 4;
  int decoder_width = 192;
  int baseline_width = 160;
  int streams = 4;

  float mel_weight = 45.0f;
  float fm_weight = 2.0f;

  float lr_initial = 1e-4f;
  float lr_decayed = 5e-5f;
  float beta1 = 0.8f;
  float beta2 = 0.99f;
  float adam_eps = 1e-9f;

  int64_t total_steps = 2000;
  int64_t decay_step = 0;  // 0 -> total_steps / 2
  int batch_size = 8;
  int segment_frames = 32;
  int64_t checkpoint_interval = 500;

  std::string content_provider = "mfcc";  // or "file"
  std::optional<std::string> emotion_file;

  float noise_scale = 0.6f;
  std::string inference_path = "prior";

  model::ModelConfig to_model_config() const;
  int64_t effective_decay_step() const { return decay_step > 0 ? decay_step : total_steps / 2; }
  nn::AdamConfig adam_config() const;

  void validate() const;
};

PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config_text(const std::string& text, const std::string& origin);

}  // namespace svc::pipeline
