#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "common/error.hpp"
#include "dsp/wav.hpp"
#include "features/yin.hpp"
#include "pipeline/benchmark.hpp"
#include "pipeline/config.hpp"
#include "pipeline/convert.hpp"
#include "pipeline/dataset.hpp"
#include "pipeline/export.hpp"
#include "pipeline/toy_data.hpp"
#include "pipeline/train.hpp"

using namespace svc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / name;
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string read_file(const std::string& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

pipeline::PipelineConfig tiny_train_config() {
  return pipeline::parse_config_text(R"(
    seed = 0
    train.total_steps = 6
    train.batch_size = 2
    train.segment_frames = 16
    train.checkpoint_interval = 3
  )",
                                     "inline");
}

}  // namespace

TEST_CASE("config: defaults, dotted keys, comments") {
  auto cfg = pipeline::parse_config_text(R"(
    # comment line
    stft.hop_length = 128
    train.batch_size = 4   # trailing comment
    infer.noise_scale = 0.5
  )",
                                         "test");
  CHECK(cfg.stft.hop_length == 128);
  CHECK(cfg.batch_size == 4);
  CHECK(cfg.noise_scale == 0.5f);
  CHECK(cfg.total_steps == 2000);
  CHECK(cfg.mel_weight == 45.0f);
  CHECK(cfg.beta1 == 0.8f);
  CHECK(cfg.effective_decay_step() == 1000);
}

TEST_CASE("config: unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(pipeline::parse_config_text("no_such_key = 1", "t"), Error);
  CHECK_THROWS_AS(pipeline::parse_config_text("train.batch_size = soon", "t"), Error);
  CHECK_THROWS_AS(pipeline::parse_config_text("sample_rate = 22050", "t"), Error);
  CHECK_THROWS_AS(pipeline::parse_config_text("infer.path = posterior", "t"), Error);
  CHECK_THROWS_AS(pipeline::parse_config_text("stft.hop_length = 100", "t"), Error);
  try {
    pipeline::parse_config_text("x = 1", "t");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidConfig);
  }
}

TEST_CASE("toy data: deterministic, readable, pitched as scripted") {
  TempDir dir("svc_toy_test");
  pipeline::ToyDataSpec spec;
  spec.clips_per_speaker = 2;
  spec.seconds = 1.0;
  pipeline::generate_toy_dataset(dir.str(), spec);

  auto a0 = dsp::read_wav((dir.path / "spk0_clip00.wav").string());
  CHECK(a0.sample_rate == 16000);
  CHECK(a0.samples.size() == 16000);

  auto c0 = features::track_f0(a0, dsp::StftConfig{});
  CHECK(c0.voiced_count() > int(c0.frames() * 0.8));
  CHECK(c0.voiced_mean_hz() == doctest::Approx(220.0).epsilon(0.06));

  auto a1 = dsp::read_wav((dir.path / "spk1_clip01.wav").string());
  auto c1 = features::track_f0(a1, dsp::StftConfig{});
  CHECK(c1.voiced_mean_hz() == doctest::Approx(330.0).epsilon(0.06));

  // regeneration is bitwise identical
  auto clip_a = pipeline::synth_toy_clip(0, 220.0, 0.5, 7);
  auto clip_b = pipeline::synth_toy_clip(0, 220.0, 0.5, 7);
  CHECK(std::memcmp(clip_a.samples.data(), clip_b.samples.data(),
                    clip_a.samples.size() * 4) == 0);
}

TEST_CASE("extract_features: aligned records, idempotent cache, partial failure") {
  TempDir dir("svc_extract_test");
  pipeline::ToyDataSpec spec;
  spec.clips_per_speaker = 2;
  spec.seconds = 1.0;
  pipeline::generate_toy_dataset(dir.str(), spec);

  auto cfg = tiny_train_config();
  auto r1 = pipeline::extract_features(cfg, dir.str());
  CHECK(r1.records.size() == 4);
  CHECK(r1.failures.empty());
  CHECK(r1.cache_misses == 4);
  for (const auto& rec : r1.records) {
    CHECK(rec.frames == 126);
    CHECK(rec.mel.frames == 126);
    CHECK(int(rec.f0.frames()) == 126);
    CHECK(rec.content.frames == 126);
    CHECK(rec.lin_mag.size() == size_t(257) * 126);
    CHECK((rec.speaker_label == "spk0" || rec.speaker_label == "spk1"));
  }

  // second pass: all hits, bitwise-identical features
  auto r2 = pipeline::extract_features(cfg, dir.str());
  CHECK(r2.cache_hits == 4);
  CHECK(r2.cache_misses == 0);
  CHECK(std::memcmp(r1.records[0].content.values.data(), r2.records[0].content.values.data(),
                    r1.records[0].content.values.size() * 4) == 0);

  // a corrupt wav fails alone; the batch continues
  std::ofstream bad((dir.path / "zzz_bad.wav").string(), std::ios::binary);
  bad << "this is not audio";
  bad.close();
  auto r3 = pipeline::extract_features(cfg, dir.str());
  CHECK(r3.records.size() == 4);
  REQUIRE(r3.failures.size() == 1);
  CHECK(r3.failures[0].path.find("zzz_bad") != std::string::npos);
}

TEST_CASE("train: metrics log, identity-flow start, determinism, checkpoints") {
  TempDir data("svc_train_data");
  pipeline::ToyDataSpec spec;
  spec.clips_per_speaker = 2;
  spec.seconds = 1.0;
  pipeline::generate_toy_dataset(data.str(), spec);

  auto cfg = tiny_train_config();
  TempDir out1("svc_train_out1");
  auto res1 = pipeline::train(cfg, data.str(), out1.str());
  CHECK(res1.steps == 6);
  CHECK(fs::exists(res1.final_checkpoint));
  CHECK(fs::exists(res1.final_checkpoint + ".opt"));
  CHECK(fs::exists(out1.path / "ckpt_000000.rasv"));
  CHECK(fs::exists(out1.path / "ckpt_000003.rasv"));
  CHECK(fs::exists(out1.path / "latest.rasv"));

  auto metrics1 = read_file(res1.metrics_path);
  auto lines = std::count(metrics1.begin(), metrics1.end(), '\n');
  CHECK(lines == 7);  // header + 6 steps
  // the first logged step runs on the identity-initialized flow
  auto first_row = metrics1.substr(metrics1.find('\n') + 1);
  first_row = first_row.substr(0, first_row.find('\n'));
  CHECK(first_row.substr(first_row.rfind(',') + 1) == "0");

  TempDir out2("svc_train_out2");
  auto res2 = pipeline::train(cfg, data.str(), out2.str());
  CHECK(read_file(res2.metrics_path) == metrics1);  // bitwise-identical loss curve
}

TEST_CASE("convert: length contract, delta-zero path, checkpoint round trip") {
  TempDir data("svc_convert_data");
  pipeline::ToyDataSpec spec;
  spec.clips_per_speaker = 2;
  spec.seconds = 1.0;
  pipeline::generate_toy_dataset(data.str(), spec);

  auto cfg = tiny_train_config();
  cfg.total_steps = 2;
  TempDir out("svc_convert_out");
  auto trained = pipeline::train(cfg, data.str(), out.str());

  const std::string src = (data.path / "spk0_clip00.wav").string();
  const std::string tgt = (data.path / "spk1_clip00.wav").string();
  const std::string out_wav = (out.path / "conv.wav").string();

  auto r = pipeline::convert(cfg, trained.final_checkpoint, src, tgt, out_wav);
  CHECK(fs::exists(out_wav));
  // 16000 samples -> 126 frames -> 16128 samples: within one hop
  CHECK(r.audio.samples.size() == 16128);
  CHECK(r.frames == 126);

  // identical conversion is bitwise reproducible
  auto r2 = pipeline::convert(cfg, trained.final_checkpoint, src, tgt, "");
  CHECK(std::memcmp(r.audio.samples.data(), r2.audio.samples.data(),
                    r.audio.samples.size() * 4) == 0);

  // source == target: the delta on voiced frames is zero
  auto r3 = pipeline::convert(cfg, trained.final_checkpoint, src, src, "");
  auto direct = features::track_f0(dsp::read_wav(src), cfg.stft);
  REQUIRE(r3.shifted_f0.frames() == direct.frames());
  for (size_t t = 0; t < direct.frames(); ++t) {
    CHECK(r3.shifted_f0.voiced[t] == direct.voiced[t]);
    if (direct.voiced[t])
      CHECK(r3.shifted_f0.f0_hz[t] == doctest::Approx(direct.f0_hz[t]).epsilon(1e-6));
  }

  // a checkpoint trained under different dims is rejected
  auto cfg_bad = cfg;
  cfg_bad.flow_blocks = 2;
  CHECK_THROWS_AS(pipeline::convert(cfg_bad, trained.final_checkpoint, src, tgt, ""), Error);
}

TEST_CASE("train: divergence aborts with NumericalError, last checkpoint retained") {
  TempDir data("svc_diverge_data");
  pipeline::ToyDataSpec spec;
  spec.clips_per_speaker = 1;
  spec.seconds = 1.0;
  pipeline::generate_toy_dataset(data.str(), spec);

  auto cfg = tiny_train_config();
  cfg.total_steps = 8;
  cfg.lr_initial = 1e8f;  // guaranteed blow-up
  cfg.lr_decayed = 1e8f;
  TempDir out("svc_diverge_out");
  try {
    pipeline::train(cfg, data.str(), out.str());
    FAIL("expected NumericalError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NumericalError);
  }
  CHECK(fs::exists(out.path / "ckpt_000000.rasv"));  // last good state survives
}

TEST_CASE("benchmark: reports both decoders with positive RTFs") {
  auto cfg = tiny_train_config();
  auto report = pipeline::benchmark_rtf(cfg, "", 0.25, pipeline::DecoderChoice::both, 1);
  CHECK(report.has_msistft);
  CHECK(report.has_baseline);
  CHECK(report.msistft_rtf > 0.0);
  CHECK(report.baseline_rtf > 0.0);
  auto text = report.to_text();
  CHECK(text.find("0.048") != std::string::npos);

  auto solo = pipeline::benchmark_rtf(cfg, "", 0.25, pipeline::DecoderChoice::msistft, 1);
  CHECK(solo.has_msistft);
  CHECK_FALSE(solo.has_baseline);
}

TEST_CASE("export-embeddings: one unit-norm row per utterance") {
  TempDir data("svc_export_data");
  pipeline::ToyDataSpec spec;
  spec.clips_per_speaker = 2;
  spec.seconds = 1.0;
  pipeline::generate_toy_dataset(data.str(), spec);

  auto cfg = tiny_train_config();
  const std::string csv = (data.path / "emb.csv").string();
  auto result = pipeline::export_embeddings(cfg, "", data.str(), csv);
  CHECK(result.rows == 4);
  CHECK(result.failures == 0);

  std::ifstream in(csv);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 256);  // id + 256 values
    double norm = 0;
    size_t pos = line.find(',');
    std::string rest = line.substr(pos + 1);
    std::istringstream vals(rest);
    std::string tok;
    while (std::getline(vals, tok, ',')) norm += std::stod(tok) * std::stod(tok);
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-5));
  }
  CHECK(rows == 4);
}
