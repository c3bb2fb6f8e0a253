#include "pipeline/export.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "common/error.hpp"
#include "dsp/mel.hpp"
#include "dsp/wav.hpp"
#include "features/speaker.hpp"
#include "model/model.hpp"

namespace svc::pipeline {

namespace fs = std::filesystem;

ExportResult export_embeddings(const PipelineConfig& cfg, const std::string& checkpoint,
                               const std::string& wav_dir, const std::string& out_csv) {
  if (!fs::is_directory(wav_dir))
    raise(ErrorKind::InvalidInput, "not a directory: " + wav_dir);

  model::Model m(cfg.to_model_config(), cfg.seed);
  if (!checkpoint.empty()) m.load_checkpoint(checkpoint);

  std::vector<std::string> wavs;
  for (const auto& e : fs::directory_iterator(wav_dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path().string());
  std::sort(wavs.begin(), wavs.end());
  if (wavs.empty()) raise(ErrorKind::InvalidInput, "no wav files in: " + wav_dir);

  std::ofstream out(out_csv);
  if (!out) raise(ErrorKind::InvalidInput, "cannot write: " + out_csv);

  ExportResult result;
  for (const auto& path : wavs) {
    try {
      auto audio = dsp::read_wav(path);
      auto mel = dsp::mel_spectrogram(audio, cfg.stft, cfg.mel_bands);
      auto emb = features::embed_speaker(mel, m.gen_params());
      out << fs::path(path).stem().string();
      char buf[32];
      for (float v : emb.values) {
        std::snprintf(buf, sizeof(buf), ",%.9g", v);
        out << buf;
      }
      out << "\n";
      result.rows += 1;
    } catch (const Error& e) {
      std::cerr << "export-embeddings: skipping " << path << ": " << e.what() << "\n";
      result.failures += 1;
    }
  }
  return result;
}

}  // namespace svc::pipeline
