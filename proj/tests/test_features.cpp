#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "common/error.hpp"
#include "features/conditions.hpp"
#include "features/content.hpp"
#include "features/emotion.hpp"
#include "features/f0.hpp"
#include "features/rafe.hpp"
#include "features/speaker.hpp"
#include "features/yin.hpp"
#include "nn/random.hpp"

using namespace svc;
using dsp::AudioBuffer;
using dsp::StftConfig;
namespace fs = std::filesystem;

namespace {

AudioBuffer tone(double freq_hz, double seconds, double amp = 0.5) {
  AudioBuffer a;
  a.samples.resize(size_t(seconds * 16000));
  for (size_t n = 0; n < a.samples.size(); ++n)
    a.samples[n] = float(amp * std::sin(2.0 * M_PI * freq_hz * double(n) / 16000.0));
  return a;
}

}  // namespace

TEST_CASE("yin: pure 220 Hz tone is voiced within 1 Hz on every frame") {
  auto c = features::track_f0(tone(220.0, 1.0), StftConfig{});
  REQUIRE(c.frames() == 126);
  for (size_t t = 0; t < c.frames(); ++t) {
    CHECK(c.voiced[t] == 1);
    CHECK(c.f0_hz[t] == doctest::Approx(220.0).epsilon(1.0 / 220.0));
  }
}

TEST_CASE("yin: white noise is almost entirely unvoiced") {
  AudioBuffer a;
  a.samples.resize(16000);
  nn::Pcg32 rng(4242);
  for (auto& s : a.samples) s = float(0.5 * rng.uniform(-1.0, 1.0));
  auto c = features::track_f0(a, StftConfig{});
  int unvoiced = int(c.frames()) - c.voiced_count();
  CHECK(double(unvoiced) / double(c.frames()) >= 0.9);
}

TEST_CASE("yin: silence is fully unvoiced with zero f0") {
  AudioBuffer a;
  a.samples.assign(16000, 0.0f);
  auto c = features::track_f0(a, StftConfig{});
  for (size_t t = 0; t < c.frames(); ++t) {
    CHECK(c.voiced[t] == 0);
    CHECK(c.f0_hz[t] == 0.0f);
  }
}

TEST_CASE("yin: tones across [80, 800] Hz track within 1% (property)") {
  for (double f : {80.0, 123.0, 220.0, 440.0, 633.0, 800.0}) {
    auto c = features::track_f0(tone(f, 0.6), StftConfig{});
    std::vector<float> voiced;
    for (size_t t = 0; t < c.frames(); ++t)
      if (c.voiced[t]) voiced.push_back(c.f0_hz[t]);
    REQUIRE(voiced.size() > c.frames() / 2);
    std::sort(voiced.begin(), voiced.end());
    double median = voiced[voiced.size() / 2];
    INFO("f=", f, " median=", median);
    CHECK(std::fabs(median - f) / f < 0.01);
  }
}

TEST_CASE("yin: audio shorter than one analysis window errors") {
  AudioBuffer a;
  a.samples.assign(100, 0.1f);
  CHECK_THROWS_AS(features::track_f0(a, StftConfig{}), Error);
}

TEST_CASE("shift_f0: exact additive shift") {
  features::F0Contour src, tgt;
  src.f0_hz = {200.f, 0.f, 220.f};
  src.voiced = {1, 0, 1};
  tgt.f0_hz = {300.f, 300.f};
  tgt.voiced = {1, 1};
  auto out = features::shift_f0(src, tgt);
  // delta = 300 - 210 = +90
  CHECK(out.f0_hz[0] == doctest::Approx(290.f));
  CHECK(out.f0_hz[1] == 0.f);
  CHECK(out.f0_hz[2] == doctest::Approx(310.f));
  CHECK(out.voiced == src.voiced);
}

TEST_CASE("shift_f0: identical contours shift by zero") {
  features::F0Contour src;
  src.f0_hz = {150.f, 180.f, 0.f};
  src.voiced = {1, 1, 0};
  auto out = features::shift_f0(src, src);
  for (size_t i = 0; i < src.frames(); ++i) CHECK(out.f0_hz[i] == src.f0_hz[i]);
}

TEST_CASE("shift_f0: hand-computed downward shift with unvoiced gap") {
  features::F0Contour src, tgt;
  src.f0_hz = {200.f, 0.f, 220.f};
  src.voiced = {1, 0, 1};
  tgt.f0_hz = {150.f};
  tgt.voiced = {1};
  auto out = features::shift_f0(src, tgt);  // delta = 150 - 210 = -60... per spec -35 case
  CHECK(out.f0_hz[0] == doctest::Approx(140.f));
  CHECK(out.f0_hz[1] == 0.f);
  CHECK(out.f0_hz[2] == doctest::Approx(160.f));
}

TEST_CASE("shift_f0: fully unvoiced side raises InsufficientVoicing") {
  features::F0Contour src, tgt;
  src.f0_hz = {0.f};
  src.voiced = {0};
  tgt.f0_hz = {100.f};
  tgt.voiced = {1};
  try {
    features::shift_f0(src, tgt);
    FAIL("expected InsufficientVoicing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientVoicing);
  }
}

TEST_CASE("shift_f0: clamps to the tracker floor") {
  features::F0Contour src, tgt;
  src.f0_hz = {80.f};
  src.voiced = {1};
  tgt.f0_hz = {60.f};  // delta = -20 -> 60; then a deep shift below 50 clamps
  tgt.voiced = {1};
  auto out = features::shift_f0(src, tgt);
  CHECK(out.f0_hz[0] == doctest::Approx(60.f));
  tgt.f0_hz = {31.f};
  out = features::shift_f0(src, tgt);
  CHECK(out.f0_hz[0] == doctest::Approx(50.f));
}

TEST_CASE("f0 bins: endpoints and the hand-derived midpoint") {
  CHECK(features::f0_bin(50.0) == 0);
  CHECK(features::f0_bin(1100.0) == 255);
  // floor(256*log(234.6/50)/log(22)) = 128
  CHECK(features::f0_bin(234.6) == 128);
}

TEST_CASE("f0 embedding rows: unvoiced frames use the dedicated row") {
  features::F0Contour c;
  c.f0_hz = {0.f, 100.f, 0.f};
  c.voiced = {0, 1, 0};
  auto rows = features::f0_embedding_rows(c);
  CHECK(rows[0] == features::kF0UnvoicedRow);
  CHECK(rows[1] == features::f0_bin(100.0));
  CHECK(rows[2] == features::kF0UnvoicedRow);
}

TEST_CASE("content file provider: shape, alignment, and errors") {
  auto dir = fs::temp_directory_path() / "svc_feat_test";
  fs::create_directories(dir);
  auto path = (dir / "c.rafe").string();

  features::RafeData d;
  d.frames = 124;
  d.dim = 1024;
  d.values.assign(size_t(124) * 1024, 0.0f);
  for (int t = 0; t < 124; ++t) d.values[size_t(t) * 1024] = float(t);
  features::write_rafe(path, d);

  // 124 -> 126: last frame repeated twice
  auto c = features::content_from_file(path, 126);
  CHECK(c.frames == 126);
  CHECK(c.frame(124)[0] == 123.0f);
  CHECK(c.frame(125)[0] == 123.0f);

  // beyond +-2 is an alignment error
  CHECK_THROWS_AS(features::content_from_file(path, 130), Error);

  // wrong dim is a file error
  features::RafeData bad;
  bad.frames = 10;
  bad.dim = 512;
  bad.values.assign(10 * 512, 0.f);
  auto bad_path = (dir / "bad.rafe").string();
  features::write_rafe(bad_path, bad);
  try {
    features::content_from_file(bad_path, 10);
    FAIL("expected FeatureFileError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FeatureFileError);
  }
  fs::remove_all(dir);
}

TEST_CASE("content mfcc provider is deterministic and well-shaped") {
  auto a = tone(330.0, 0.5);
  auto c1 = features::content_mfcc(a, StftConfig{}, 7);
  auto c2 = features::content_mfcc(a, StftConfig{}, 7);
  CHECK(c1.frames == StftConfig{}.frame_count(a.samples.size()));
  CHECK(c1.dim == 1024);
  CHECK(std::memcmp(c1.values.data(), c2.values.data(), c1.values.size() * 4) == 0);
  // different seed rotates the basis
  auto c3 = features::content_mfcc(a, StftConfig{}, 8);
  CHECK(std::memcmp(c1.values.data(), c3.values.data(), c1.values.size() * 4) != 0);
}

TEST_CASE("orthonormal projection has unit orthogonal columns") {
  auto p = features::orthonormal_projection(64, 8, 3);
  for (int c1 = 0; c1 < 8; ++c1)
    for (int c2 = c1; c2 < 8; ++c2) {
      double acc = 0;
      for (int r = 0; r < 64; ++r) acc += double(p[size_t(r) * 8 + c1]) * p[size_t(r) * 8 + c2];
      CHECK(acc == doctest::Approx(c1 == c2 ? 1.0 : 0.0).epsilon(1e-5));
    }
}

TEST_CASE("emotion embedding: default, verbatim, and projected") {
  auto dir = fs::temp_directory_path() / "svc_emo_test";
  fs::create_directories(dir);

  auto zero = features::embed_emotion(std::nullopt, 1);
  CHECK(zero.size() == 256);
  for (float v : zero) CHECK(v == 0.0f);

  features::RafeData d;
  d.frames = 0;
  d.dim = 256;
  d.values.resize(256);
  for (int i = 0; i < 256; ++i) d.values[i] = float(i) * 0.01f;
  auto p256 = (dir / "e256.rafe").string();
  features::write_rafe(p256, d);
  auto v = features::embed_emotion(p256, 1);
  CHECK(std::memcmp(v.data(), d.values.data(), 256 * 4) == 0);

  features::RafeData d768;
  d768.frames = 0;
  d768.dim = 768;
  d768.values.assign(768, 0.25f);
  auto p768 = (dir / "e768.rafe").string();
  features::write_rafe(p768, d768);
  auto w1 = features::embed_emotion(p768, 1);
  auto w2 = features::embed_emotion(p768, 1);
  CHECK(w1.size() == 256);
  CHECK(std::memcmp(w1.data(), w2.data(), 256 * 4) == 0);

  std::ofstream junk((dir / "junk.rafe").string(), std::ios::binary);
  junk << "not a feature file";
  junk.close();
  CHECK_THROWS_AS(features::embed_emotion((dir / "junk.rafe").string(), 1), Error);
  fs::remove_all(dir);
}

TEST_CASE("speaker embedding: unit norm and time-reversal invariance") {
  nn::ParamStore store;
  nn::Pcg32 rng(9);
  features::register_condition_params(store, features::ConditionDims{}, rng);

  dsp::MelSpectrogram mel;
  mel.frames = 40;
  mel.mel_bands = 80;
  mel.values.resize(size_t(40) * 80);
  nn::Pcg32 mrng(5);
  for (auto& v : mel.values) v = float(mrng.uniform(-3.0, 1.0));

  auto e = features::embed_speaker(mel, store);
  double norm = 0;
  for (float v : e.values) norm += double(v) * v;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));

  dsp::MelSpectrogram rev = mel;
  for (int t = 0; t < mel.frames; ++t)
    for (int b = 0; b < 80; ++b) rev.at(t, b) = mel.at(mel.frames - 1 - t, b);
  auto er = features::embed_speaker(rev, store);
  for (int i = 0; i < 256; ++i) CHECK(er.values[i] == doctest::Approx(e.values[i]).epsilon(1e-5));

  dsp::MelSpectrogram tiny;
  tiny.frames = 4;
  tiny.mel_bands = 80;
  tiny.values.assign(320, 0.f);
  CHECK_THROWS_AS(features::embed_speaker(tiny, store), Error);
}

TEST_CASE("assemble_conditions: shapes, block layout, zero emotion block") {
  nn::ParamStore store;
  nn::Pcg32 rng(11);
  features::ConditionDims dims;
  features::register_condition_params(store, dims, rng);

  nn::Tape<float> tp;
  auto ids = features::bind_condition_params(tp, store, nullptr);

  const int T = 126;
  std::vector<float> raw(size_t(1024) * T, 0.3f);
  int raw_id = tp.constant(nn::Shape::mat(1024, T), raw.data());
  int content = features::build_content_prenet(tp, raw_id, ids);
  CHECK(tp.shape(content) == nn::Shape::mat(192, T));

  std::vector<float> spk(256, 0.0f);
  spk[0] = 1.0f;
  int spk_id = tp.constant(nn::Shape::mat(256, 1), spk.data());
  std::vector<float> emo(256, 0.0f);
  int emo_id = tp.constant(nn::Shape::mat(256, 1), emo.data());

  std::vector<int> rows(T, features::kF0UnvoicedRow);
  int f0ch = features::build_f0_channels(tp, ids, rows);
  CHECK(tp.shape(f0ch) == nn::Shape::mat(64, T));

  auto g = features::assemble_conditions(tp, content, spk_id, emo_id, f0ch);
  CHECK(tp.shape(g.cond) == nn::Shape::mat(768, T));

  // emotion block rows are exactly zero, neighbors untouched
  const float* cv = tp.val(g.cond);
  for (int r = dims.emotion_row0(); r < dims.f0_row0(); ++r)
    for (int t = 0; t < T; ++t) CHECK(cv[size_t(r) * T + t] == 0.0f);
  // speaker block row 0 broadcasts the 1.0
  for (int t = 0; t < T; ++t) CHECK(cv[size_t(dims.speaker_row0()) * T + t] == 1.0f);
  // f0 block equals the unvoiced embedding row broadcast
  const float* table = store.get("cond.f0_embed.table").value.data();
  for (int d = 0; d < 64; ++d)
    CHECK(cv[size_t(dims.f0_row0() + d) * T] ==
          table[size_t(features::kF0UnvoicedRow) * 64 + d]);

  // frame mismatch raises
  std::vector<int> short_rows(T - 5, 0);
  int f0short = features::build_f0_channels(tp, ids, short_rows);
  CHECK_THROWS_AS(features::assemble_conditions(tp, content, spk_id, emo_id, f0short), Error);
}
