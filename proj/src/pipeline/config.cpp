#include "pipeline/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "common/error.hpp"

namespace svc::pipeline {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    raise(ErrorKind::InvalidConfig, "bad integer for " + key + ": '" + v + "'");
  }
}

double parse_float(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    raise(ErrorKind::InvalidConfig, "bad number for " + key + ": '" + v + "'");
  }
}

}  // namespace

model::ModelConfig PipelineConfig::to_model_config() const {
  model::ModelConfig m;
  m.spec_bins = stft.n_fft / 2 + 1;
  m.d_z = d_z;
  m.hidden = hidden;
  m.posterior_layers = posterior_layers;
  m.flow_blocks = flow_blocks;
  m.flow_layers = flow_layers;
  m.prior_layers = prior_layers;
  m.decoder_width = decoder_width;
  m.baseline_width = baseline_width;
  m.streams = streams;
  m.mel_bands = mel_bands;
  m.sample_rate = sample_rate;
  m.stft = stft;
  return m;
}

nn::AdamConfig PipelineConfig::adam_config() const {
  nn::AdamConfig a;
  a.lr_initial = lr_initial;
  a.lr_decayed = lr_decayed;
  a.decay_step = effective_decay_step();
  a.beta1 = beta1;
  a.beta2 = beta2;
  a.eps = adam_eps;
  return a;
}

void PipelineConfig::validate() const {
  if (sample_rate != 16000)
    raise(ErrorKind::InvalidConfig, "sample_rate must be 16000");
  stft.validate();
  if (mel_bands < 1) raise(ErrorKind::InvalidConfig, "mel.bands must be >= 1");
  if (d_z < 2 || d_z % 2 != 0) raise(ErrorKind::InvalidConfig, "model.d_z must be even");
  if (flow_blocks < 1) raise(ErrorKind::InvalidConfig, "model.flow_blocks must be >= 1");
  if (batch_size < 1) raise(ErrorKind::InvalidConfig, "train.batch_size must be >= 1");
  if (segment_frames < 4) raise(ErrorKind::InvalidConfig, "train.segment_frames must be >= 4");
  if (total_steps < 1) raise(ErrorKind::InvalidConfig, "train.total_steps must be >= 1");
  if (checkpoint_interval < 1)
    raise(ErrorKind::InvalidConfig, "train.checkpoint_interval must be >= 1");
  if (content_provider != "mfcc" && content_provider != "file")
    raise(ErrorKind::InvalidConfig, "content.provider must be 'mfcc' or 'file'");
  if (noise_scale < 0.0f || noise_scale > 2.0f)
    raise(ErrorKind::InvalidConfig, "infer.noise_scale out of range");
  if (inference_path != "prior")
    raise(ErrorKind::InvalidConfig,
          "infer.path: only 'prior' is implemented (reserved switch)");
  if (baseline_width % 16 != 0)
    raise(ErrorKind::InvalidConfig, "model.baseline_width must be divisible by 16");
  if (decoder_width % 4 != 0)
    raise(ErrorKind::InvalidConfig, "model.decoder_width must be divisible by 4");
}

PipelineConfig parse_config_text(const std::string& text, const std::string& origin) {
  PipelineConfig cfg;
  std::map<std::string, std::function<void(const std::string&, const std::string&)>> keys;

  auto int_key = [&](const std::string& name, auto setter) {
    keys[name] = [&cfg, setter](const std::string& k, const std::string& v) {
      setter(cfg, parse_int(k, v));
    };
  };
  auto float_key = [&](const std::string& name, auto setter) {
    keys[name] = [&cfg, setter](const std::string& k, const std::string& v) {
      setter(cfg, parse_float(k, v));
    };
  };
  auto str_key = [&](const std::string& name, auto setter) {
    keys[name] = [&cfg, setter](const std::string&, const std::string& v) { setter(cfg, v); };
  };

  int_key("sample_rate", [](auto& c, int64_t v) { c.sample_rate = int(v); });
  int_key("seed", [](auto& c, int64_t v) { c.seed = uint64_t(v); });
  int_key("stft.n_fft", [](auto& c, int64_t v) { c.stft.n_fft = int(v); });
  int_key("stft.win_length", [](auto& c, int64_t v) { c.stft.win_length = int(v); });
  int_key("stft.hop_length", [](auto& c, int64_t v) { c.stft.hop_length = int(v); });
  int_key("mel.bands", [](auto& c, int64_t v) { c.mel_bands = int(v); });
  int_key("model.d_z", [](auto& c, int64_t v) { c.d_z = int(v); });
  int_key("model.hidden", [](auto& c, int64_t v) { c.hidden = int(v); });
  int_key("model.posterior_layers", [](auto& c, int64_t v) { c.posterior_layers = int(v); });
  int_key("model.flow_blocks", [](auto& c, int64_t v) { c.flow_blocks = int(v); });
  int_key("model.flow_layers", [](auto& c, int64_t v) { c.flow_layers = int(v); });
  int_key("model.prior_layers", [](auto& c, int64_t v) { c.prior_layers = int(v); });
  int_key("model.decoder_width", [](auto& c, int64_t v) { c.decoder_width = int(v); });
  int_key("model.baseline_width", [](auto& c, int64_t v) { c.baseline_width = int(v); });
  int_key("model.streams", [](auto& c, int64_t v) { c.streams = int(v); });
  float_key("loss.mel_weight", [](auto& c, double v) { c.mel_weight = float(v); });
  float_key("loss.fm_weight", [](auto& c, double v) { c.fm_weight = float(v); });
  float_key("optim.lr_initial", [](auto& c, double v) { c.lr_initial = float(v); });
  float_key("optim.lr_decayed", [](auto& c, double v) { c.lr_decayed = float(v); });
  float_key("optim.beta1", [](auto& c, double v) { c.beta1 = float(v); });
  float_key("optim.beta2", [](auto& c, double v) { c.beta2 = float(v); });
  float_key("optim.eps", [](auto& c, double v) { c.adam_eps = float(v); });
  int_key("train.total_steps", [](auto& c, int64_t v) { c.total_steps = v; });
  int_key("train.decay_step", [](auto& c, int64_t v) { c.decay_step = v; });
  int_key("train.batch_size", [](auto& c, int64_t v) { c.batch_size = int(v); });
  int_key("train.segment_frames", [](auto& c, int64_t v) { c.segment_frames = int(v); });
  int_key("train.checkpoint_interval", [](auto& c, int64_t v) { c.checkpoint_interval = v; });
  str_key("content.provider", [](auto& c, const std::string& v) { c.content_provider = v; });
  str_key("emotion.file", [](auto& c, const std::string& v) { c.emotion_file = v; });
  float_key("infer.noise_scale", [](auto& c, double v) { c.noise_scale = float(v); });
  str_key("infer.path", [](auto& c, const std::string& v) { c.inference_path = v; });

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorKind::InvalidConfig,
            origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = keys.find(key);
    if (it == keys.end())
      raise(ErrorKind::InvalidConfig,
            origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::InvalidConfig, "cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace svc::pipeline
