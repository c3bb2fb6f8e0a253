#include "pipeline/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "common/error.hpp"
#include "dsp/wav.hpp"
#include "features/emotion.hpp"
#include "features/rafe.hpp"
#include "features/yin.hpp"

namespace svc::pipeline {

namespace fs = std::filesystem;

namespace {

uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::InvalidInput, "cannot open: " + path);
  char buf[65536];
  uint64_t h = 0xcbf29ce484222325ULL;
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a(buf, size_t(in.gcount()), h);
  }
  return h;
}

std::string speaker_from_id(const std::string& id) {
  auto us = id.find('_');
  return us == std::string::npos ? id : id.substr(0, us);
}

struct CachePaths {
  fs::path meta, lin, mel, f0, content;
};

CachePaths cache_paths(const fs::path& cache_dir, const std::string& id) {
  return {cache_dir / (id + ".meta"), cache_dir / (id + ".lin.rafe"),
          cache_dir / (id + ".mel.rafe"), cache_dir / (id + ".f0.rafe"),
          cache_dir / (id + ".content.rafe")};
}

bool cache_fresh(const CachePaths& cp, const std::string& expected_meta) {
  std::ifstream meta(cp.meta);
  if (!meta) return false;
  std::string line;
  std::getline(meta, line);
  if (line != expected_meta) return false;
  return fs::exists(cp.lin) && fs::exists(cp.mel) && fs::exists(cp.f0) &&
         fs::exists(cp.content);
}

}  // namespace

std::string extraction_fingerprint(const PipelineConfig& cfg) {
  std::string s = "v1;" + std::to_string(cfg.stft.n_fft) + ";" +
                  std::to_string(cfg.stft.win_length) + ";" +
                  std::to_string(cfg.stft.hop_length) + ";" +
                  std::to_string(cfg.mel_bands) + ";" + cfg.content_provider + ";" +
                  std::to_string(cfg.seed);
  return std::to_string(fnv1a(s.data(), s.size()));
}

ExtractResult extract_features(const PipelineConfig& cfg, const std::string& wav_dir) {
  if (!fs::is_directory(wav_dir))
    raise(ErrorKind::InvalidInput, "not a directory: " + wav_dir);

  std::vector<std::string> wavs;
  for (const auto& entry : fs::directory_iterator(wav_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      wavs.push_back(entry.path().string());
  }
  std::sort(wavs.begin(), wavs.end());
  if (wavs.empty()) raise(ErrorKind::InvalidInput, "no wav files in: " + wav_dir);

  const fs::path cache_dir = fs::path(wav_dir) / "cache";
  fs::create_directories(cache_dir);
  const std::string fingerprint = extraction_fingerprint(cfg);

  // per-file work is independent and deterministic; slots keep the output
  // ordered regardless of scheduling
  std::vector<UtteranceRecord> slots(wavs.size());
  std::vector<uint8_t> ok(wavs.size(), 0);
  std::vector<std::string> errors(wavs.size());
  std::vector<int> hit(wavs.size(), 0);

#pragma omp parallel for schedule(dynamic)
  for (size_t wi = 0; wi < wavs.size(); ++wi) {
    const auto& path = wavs[wi];
    const std::string id = fs::path(path).stem().string();
    try {
      UtteranceRecord rec;
      rec.id = id;
      rec.wav_path = path;
      rec.speaker_label = speaker_from_id(id);

      auto audio = dsp::read_wav(path);
      rec.audio = audio.samples;
      rec.num_samples = audio.samples.size();
      rec.frames = cfg.stft.frame_count(audio.samples.size());

      const fs::path emo_side = fs::path(path).replace_extension(".emotion.rafe");
      rec.emotion = features::embed_emotion(
          fs::exists(emo_side) ? std::optional<std::string>(emo_side.string()) : std::nullopt,
          cfg.seed);

      const auto cp = cache_paths(cache_dir, id);
      const std::string meta = fingerprint + ":" + std::to_string(file_hash(path));
      const int bins = cfg.stft.n_fft / 2 + 1;

      if (cache_fresh(cp, meta)) {
        auto lin = features::read_rafe(cp.lin.string());
        auto mel = features::read_rafe(cp.mel.string());
        auto f0 = features::read_rafe(cp.f0.string());
        auto content = features::read_rafe(cp.content.string());
        if (int(lin.frames) != rec.frames || int(lin.dim) != bins)
          raise(ErrorKind::FeatureFileError, "stale lin cache for " + id);
        hit[wi] = 1;

        rec.lin_mag.assign(size_t(bins) * rec.frames, 0.f);
        for (int t = 0; t < rec.frames; ++t)
          for (int k = 0; k < bins; ++k)
            rec.lin_mag[size_t(k) * rec.frames + t] = lin.values[size_t(t) * bins + k];
        rec.mel.frames = int(mel.frames);
        rec.mel.mel_bands = int(mel.dim);
        rec.mel.values = std::move(mel.values);
        rec.f0.f0_hz.resize(f0.frames);
        rec.f0.voiced.resize(f0.frames);
        for (uint32_t t = 0; t < f0.frames; ++t) {
          rec.f0.f0_hz[t] = f0.values[size_t(t) * 2];
          rec.f0.voiced[t] = f0.values[size_t(t) * 2 + 1] > 0.5f ? 1 : 0;
        }
        rec.content.frames = int(content.frames);
        rec.content.dim = int(content.dim);
        rec.content.values = std::move(content.values);
      } else {
        auto spec = dsp::stft(audio, cfg.stft);
        auto mags = spec.magnitudes();  // frames x bins
        rec.lin_mag.assign(size_t(bins) * rec.frames, 0.f);
        for (int t = 0; t < rec.frames; ++t)
          for (int k = 0; k < bins; ++k)
            rec.lin_mag[size_t(k) * rec.frames + t] = mags[size_t(t) * bins + k];

        auto fb = dsp::make_mel_filterbank(cfg.mel_bands, cfg.stft.n_fft, cfg.sample_rate,
                                           0.0, cfg.sample_rate / 2.0);
        rec.mel = dsp::mel_from_spectrogram(spec, fb);
        rec.f0 = features::track_f0(audio, cfg.stft);

        if (cfg.content_provider == "file") {
          const fs::path side = fs::path(path).replace_extension(".content.rafe");
          rec.content = features::content_from_file(side.string(), rec.frames);
        } else {
          rec.content = features::content_mfcc(audio, cfg.stft, cfg.seed);
        }

        features::write_rafe(cp.lin.string(),
                             {uint32_t(rec.frames), uint32_t(bins), mags});
        features::write_rafe(cp.mel.string(), {uint32_t(rec.mel.frames),
                                               uint32_t(rec.mel.mel_bands), rec.mel.values});
        std::vector<float> f0v(size_t(rec.frames) * 2);
        for (int t = 0; t < rec.frames; ++t) {
          f0v[size_t(t) * 2] = rec.f0.f0_hz[t];
          f0v[size_t(t) * 2 + 1] = rec.f0.voiced[t] ? 1.0f : 0.0f;
        }
        features::write_rafe(cp.f0.string(), {uint32_t(rec.frames), 2, f0v});
        features::write_rafe(cp.content.string(),
                             {uint32_t(rec.content.frames), uint32_t(rec.content.dim),
                              rec.content.values});
        std::ofstream meta_out(cp.meta);
        meta_out << meta << "\n";
      }
      slots[wi] = std::move(rec);
      ok[wi] = 1;
    } catch (const Error& e) {
      errors[wi] = e.what();
    }
  }

  ExtractResult result;
  for (size_t wi = 0; wi < wavs.size(); ++wi) {
    if (ok[wi]) {
      result.records.push_back(std::move(slots[wi]));
      result.cache_hits += hit[wi];
      result.cache_misses += 1 - hit[wi];
    } else {
      result.failures.push_back({wavs[wi], errors[wi]});
    }
  }
  return result;
}

}  // namespace svc::pipeline
