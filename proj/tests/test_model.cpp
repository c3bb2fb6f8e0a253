#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "common/error.hpp"
#include "dsp/stft.hpp"
#include "model/model.hpp"
#include "nn/random.hpp"

using namespace svc;
using model::FlowHook;
using model::GraphCtx;
using model::Model;
using model::ModelConfig;
using nn::Shape;
using nn::Tape;

namespace {

// small flow-only config for Jacobian work
ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.d_z = 4;
  cfg.hidden = 8;
  cfg.flow_blocks = 2;
  cfg.flow_layers = 1;
  cfg.flow_kernel = 3;
  cfg.posterior_layers = 1;
  cfg.prior_layers = 1;
  cfg.decoder_width = 16;
  cfg.baseline_width = 16;
  cfg.cond.content = 2;
  cfg.cond.speaker = 2;
  cfg.cond.emotion = 1;
  cfg.cond.f0 = 1;
  return cfg;
}

std::vector<float> randn(size_t n, uint64_t seed, double scale = 1.0) {
  nn::Pcg32 rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = float(rng.normal() * scale);
  return v;
}

// give the zero-initialized coupling projections real values, at the same
// fan-in scaling the other layers are born with
void randomize_flow_outputs(Model& m, uint64_t seed, float scale = 1.0f) {
  nn::Pcg32 rng(seed);
  for (auto& p : m.gen_params().params()) {
    if (p.name.rfind("flow.", 0) != 0 || p.name.find(".post.") == std::string::npos) continue;
    if (p.shape.rank == 3) {
      float s = scale / std::sqrt(float(p.shape.d[1] * p.shape.d[2]));
      for (auto& v : p.value) v = float(rng.normal() * s);
    } else {
      for (auto& v : p.value) v = float(rng.normal() * 0.05f * scale);
    }
  }
}

}  // namespace

TEST_CASE("posterior: shape, clamp, determinism") {
  ModelConfig cfg;
  Model m(cfg, 0);
  const int T = 126;
  auto x = randn(size_t(257) * T, 1);

  auto run = [&] {
    Tape<float> tp;
    GraphCtx ctx(tp, m.gen_params());
    int xi = tp.constant(Shape::mat(257, T), x.data());
    auto g = m.build_posterior(ctx, xi);
    return std::make_pair(std::vector<float>(tp.val(g.mu), tp.val(g.mu) + size_t(192) * T),
                          std::vector<float>(tp.val(g.log_sigma),
                                             tp.val(g.log_sigma) + size_t(192) * T));
  };
  auto [mu, logs] = run();
  CHECK(mu.size() == size_t(192) * T);
  for (float v : logs) {
    CHECK(v >= -9.0f);
    CHECK(v <= 2.0f);
  }
  auto [mu2, logs2] = run();
  CHECK(std::memcmp(mu.data(), mu2.data(), mu.size() * 4) == 0);

  Tape<float> tp;
  GraphCtx ctx(tp, m.gen_params());
  auto bad = randn(size_t(100) * T, 2);
  int bi = tp.constant(Shape::mat(100, T), bad.data());
  CHECK_THROWS_AS(m.build_posterior(ctx, bi), Error);
}

TEST_CASE("reparameterize: tiny sigma, reproducibility, Monte-Carlo mean") {
  ModelConfig cfg;
  Model m(cfg, 0);
  Tape<float> tp;
  const int n = 64;
  std::vector<float> mu(n, 0.7f), logs(n, -9.0f);
  model::GaussianIds g{tp.constant(Shape::mat(n, 1), mu.data()),
                       tp.constant(Shape::mat(n, 1), logs.data())};
  int z = m.reparameterize(tp, g, 5);
  for (int i = 0; i < n; ++i)
    CHECK(std::fabs(tp.val(z)[i] - 0.7f) < 1.3e-4f * 5.0f);  // exp(-9) ~ 1.23e-4

  int z2 = m.reparameterize(tp, g, 5);
  CHECK(std::memcmp(tp.val(z), tp.val(z2), n * 4) == 0);

  // sample mean at one position over many draws
  std::vector<float> mu1{1.5f}, logs1{0.0f};
  model::GaussianIds g1{tp.constant(Shape::mat(1, 1), mu1.data()),
                        tp.constant(Shape::mat(1, 1), logs1.data())};
  const int draws = 100000;
  double acc = 0;
  for (int d = 0; d < draws; ++d) acc += tp.val(m.reparameterize(tp, g1, 1000 + d))[0];
  double mean = acc / draws;
  CHECK(std::fabs(mean - 1.5) < 3.0 / std::sqrt(double(draws)));
}

TEST_CASE("flow: identity initialization gives z_p == z and logdet == 0") {
  ModelConfig cfg;
  Model m(cfg, 0);
  const int T = 7;
  auto z = randn(size_t(192) * T, 3);
  auto c = randn(size_t(768) * T, 4);

  Tape<float> tp;
  GraphCtx ctx(tp, m.gen_params());
  int zi = tp.constant(Shape::mat(192, T), z.data());
  int ci = tp.constant(Shape::mat(768, T), c.data());
  auto out = m.build_flow_forward(ctx, zi, ci);
  CHECK(tp.scalar_value(out.logdet) == 0.0f);
  // an even number of coupling+flip blocks: the net permutation is identity
  CHECK(std::memcmp(tp.val(out.z), z.data(), z.size() * 4) == 0);
}

TEST_CASE("flow: inverse undoes forward at f32 over random params") {
  ModelConfig cfg;
  Model m(cfg, 0);
  const int T = 5;
  for (int trial = 0; trial < 50; ++trial) {
    randomize_flow_outputs(m, 100 + trial);
    auto z = randn(size_t(192) * T, 200 + trial);
    auto c = randn(size_t(768) * T, 300 + trial);

    Tape<float> tp;
    GraphCtx ctx(tp, m.gen_params());
    int zi = tp.constant(Shape::mat(192, T), z.data());
    int ci = tp.constant(Shape::mat(768, T), c.data());
    auto fwd = m.build_flow_forward(ctx, zi, ci);
    int back = m.build_flow_inverse(ctx, fwd.z, ci);
    float max_err = 0;
    for (size_t i = 0; i < z.size(); ++i)
      max_err = std::max(max_err, std::fabs(tp.val(back)[i] - z[i]));
    CHECK(max_err < 1e-5f);
  }
}

TEST_CASE("flow: double-precision round trip is below 1e-6") {
  ModelConfig cfg = tiny_config();
  Model m(cfg, 0);
  randomize_flow_outputs(m, 9);
  const int T = 3;
  auto z = randn(size_t(cfg.d_z) * T, 5);
  auto c = randn(size_t(cfg.cond.total()) * T, 6);

  Tape<double> tp;
  model::GraphCtxT<double> ctx(tp, m.gen_params());
  std::vector<double> zd(z.begin(), z.end()), cd(c.begin(), c.end());
  int zi = tp.constant(Shape::mat(cfg.d_z, T), zd.data());
  int ci = tp.constant(Shape::mat(cfg.cond.total(), T), cd.data());
  auto fwd = m.build_flow_forward(ctx, zi, ci);
  int back = m.build_flow_inverse(ctx, fwd.z, ci);
  for (size_t i = 0; i < zd.size(); ++i)
    CHECK(std::fabs(tp.val(back)[i] - zd[i]) < 1e-6);
}

TEST_CASE("flow: logdet matches the finite-difference Jacobian determinant") {
  ModelConfig cfg = tiny_config();
  const int T = 3;
  const int N = cfg.d_z * T;

  for (int inst = 0; inst < 10; ++inst) {
    Model m(cfg, 40 + inst);
    randomize_flow_outputs(m, 50 + inst, 0.4f);
    auto z0 = randn(size_t(N), 60 + inst);
    auto c = randn(size_t(cfg.cond.total()) * T, 70 + inst);
    std::vector<double> zd(z0.begin(), z0.end()), cd(c.begin(), c.end());

    auto forward = [&](const std::vector<double>& zin) {
      Tape<double> tp;
      model::GraphCtxT<double> ctx(tp, m.gen_params());
      int zi = tp.constant(Shape::mat(cfg.d_z, T), zin.data());
      int ci = tp.constant(Shape::mat(cfg.cond.total(), T), cd.data());
      auto out = m.build_flow_forward(ctx, zi, ci);
      return std::make_pair(
          std::vector<double>(tp.val(out.z), tp.val(out.z) + N),
          tp.scalar_value(out.logdet));
    };

    auto [zp, logdet] = forward(zd);

    // column-by-column central differences -> full Jacobian
    const double h = 1e-5;
    std::vector<double> jac(size_t(N) * N);
    for (int j = 0; j < N; ++j) {
      auto zp1 = zd, zm1 = zd;
      zp1[j] += h;
      zm1[j] -= h;
      auto fp = forward(zp1).first;
      auto fm = forward(zm1).first;
      for (int i = 0; i < N; ++i) jac[size_t(i) * N + j] = (fp[i] - fm[i]) / (2 * h);
    }

    // log |det| via Gaussian elimination with partial pivoting
    double log_abs_det = 0.0;
    for (int k = 0; k < N; ++k) {
      int piv = k;
      for (int r = k + 1; r < N; ++r)
        if (std::fabs(jac[size_t(r) * N + k]) > std::fabs(jac[size_t(piv) * N + k])) piv = r;
      if (piv != k)
        for (int cc = 0; cc < N; ++cc)
          std::swap(jac[size_t(k) * N + cc], jac[size_t(piv) * N + cc]);
      double d = jac[size_t(k) * N + k];
      REQUIRE(std::fabs(d) > 1e-300);
      log_abs_det += std::log(std::fabs(d));
      for (int r = k + 1; r < N; ++r) {
        double f = jac[size_t(r) * N + k] / d;
        for (int cc = k; cc < N; ++cc) jac[size_t(r) * N + cc] -= f * jac[size_t(k) * N + cc];
      }
    }

    INFO("instance ", inst, ": logdet=", logdet, " fd=", log_abs_det);
    CHECK(std::fabs(logdet - log_abs_det) /
              std::max({std::fabs(log_abs_det), std::fabs(logdet), 1e-6}) <
          1e-4);
  }
}

TEST_CASE("flow: scaling the last block's log_s adds exactly that much logdet") {
  ModelConfig cfg;
  Model m(cfg, 0);
  randomize_flow_outputs(m, 21);
  const int T = 4;
  auto z = randn(size_t(192) * T, 8);
  auto c = randn(size_t(768) * T, 9);

  Tape<float> tp;
  GraphCtx ctx(tp, m.gen_params());
  int zi = tp.constant(Shape::mat(192, T), z.data());
  int ci = tp.constant(Shape::mat(768, T), c.data());
  auto base = m.build_flow_forward(ctx, zi, ci);

  Tape<float> tp2;
  GraphCtx ctx2(tp2, m.gen_params());
  int zi2 = tp2.constant(Shape::mat(192, T), z.data());
  int ci2 = tp2.constant(Shape::mat(768, T), c.data());
  FlowHook hook;
  hook.block = cfg.flow_blocks - 1;  // last block: upstream inputs unchanged
  hook.log_s_scale = 2.0f;
  auto doubled = m.build_flow_forward(ctx2, zi2, ci2, hook);

  // the extra logdet is exactly one more copy of the last block's log_s sum
  Tape<float> tp3;
  GraphCtx ctx3(tp3, m.gen_params());
  int zi3 = tp3.constant(Shape::mat(192, T), z.data());
  int ci3 = tp3.constant(Shape::mat(768, T), c.data());
  FlowHook zero_hook;
  zero_hook.block = cfg.flow_blocks - 1;
  zero_hook.log_s_scale = 0.0f;
  auto zeroed = m.build_flow_forward(ctx3, zi3, ci3, zero_hook);
  float last_block_sum = tp.scalar_value(base.logdet) - tp3.scalar_value(zeroed.logdet);

  CHECK(tp2.scalar_value(doubled.logdet) ==
        doctest::Approx(tp.scalar_value(base.logdet) + last_block_sum).epsilon(1e-4));
}

TEST_CASE("flow: every condition block influences the output") {
  ModelConfig cfg;
  Model m(cfg, 0);
  randomize_flow_outputs(m, 31);
  const int T = 4;
  auto z = randn(size_t(192) * T, 18);
  auto c = randn(size_t(768) * T, 19);

  auto run = [&](const std::vector<float>& cond) {
    Tape<float> tp;
    GraphCtx ctx(tp, m.gen_params());
    int zi = tp.constant(Shape::mat(192, T), z.data());
    int ci = tp.constant(Shape::mat(768, T), cond.data());
    auto out = m.build_flow_forward(ctx, zi, ci);
    return std::vector<float>(tp.val(out.z), tp.val(out.z) + z.size());
  };
  auto base = run(c);

  features::ConditionDims dims;
  const int row0[4] = {dims.content_row0(), dims.speaker_row0(), dims.emotion_row0(),
                       dims.f0_row0()};
  const int rows[4] = {dims.content, dims.speaker, dims.emotion, dims.f0};
  for (int blk = 0; blk < 4; ++blk) {
    auto mod = c;
    for (int r = row0[blk]; r < row0[blk] + rows[blk]; ++r)
      for (int t = 0; t < T; ++t) mod[size_t(r) * T + t] += 0.5f;
    auto out = run(mod);
    CHECK(std::memcmp(out.data(), base.data(), out.size() * 4) != 0);
  }
}

TEST_CASE("prior: analytic log-density cases") {
  Tape<float> tp;
  // N elements, standard normal at the mode
  const int N = 10;
  std::vector<float> zeros(N, 0.0f);
  int z = tp.constant(Shape::mat(N, 1), zeros.data());
  int mu = tp.constant_fill(Shape::mat(N, 1), 0.0f);
  int logs = tp.constant_fill(Shape::mat(N, 1), 0.0f);
  float lp = tp.scalar_value(model::gaussian_logprob_sum(tp, z, mu, logs));
  CHECK(lp == doctest::Approx(-0.5 * N * std::log(2 * M_PI)).epsilon(1e-6));

  // single element, mean 1, evaluated at 0
  int z1 = tp.constant_fill(Shape::scalar(), 0.0f);
  int mu1 = tp.constant_fill(Shape::scalar(), 1.0f);
  int logs1 = tp.constant_fill(Shape::scalar(), 0.0f);
  float lp1 = tp.scalar_value(model::gaussian_logprob_sum(tp, z1, mu1, logs1));
  CHECK(lp1 == doctest::Approx(-0.5 * std::log(2 * M_PI) - 0.5).epsilon(1e-6));
  CHECK(lp1 == doctest::Approx(-1.4189385).epsilon(1e-5));

  // shift both the sample and the mean: identical density
  int z_shift = tp.constant_fill(Shape::scalar(), 2.5f);
  int mu_shift = tp.constant_fill(Shape::scalar(), 3.5f);
  float lp2 = tp.scalar_value(model::gaussian_logprob_sum(tp, z_shift, mu_shift, logs1));
  CHECK(lp2 == doctest::Approx(lp1).epsilon(1e-6));
}

TEST_CASE("kl: identity case is exactly zero; shifted case is 0.5") {
  Tape<float> tp;
  const int N = 12;
  auto mu_v = randn(N, 77);
  int mu = tp.constant(Shape::mat(N, 1), mu_v.data());
  int logs = tp.constant_fill(Shape::mat(N, 1), -0.3f);
  model::GaussianIds q{mu, logs};
  // identity flow: z_p = z = mu, p = q, logdet = 0
  int logdet = tp.constant_fill(Shape::scalar(), 0.0f);
  int kl = model::build_kl(tp, q, mu, q, mu, logdet, N);
  CHECK(tp.scalar_value(kl) == 0.0f);

  // q = N(0,1), p = N(1,1), z = 0, one element
  model::GaussianIds q1{tp.constant_fill(Shape::scalar(), 0.0f),
                        tp.constant_fill(Shape::scalar(), 0.0f)};
  model::GaussianIds p1{tp.constant_fill(Shape::scalar(), 1.0f),
                        tp.constant_fill(Shape::scalar(), 0.0f)};
  int z0 = tp.constant_fill(Shape::scalar(), 0.0f);
  int kl1 = model::build_kl(tp, q1, z0, p1, z0, logdet, 1.0);
  CHECK(tp.scalar_value(kl1) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("kl: Monte-Carlo estimate matches closed-form diagonal KL within 2%") {
  // q = N(0.3, 0.8^2), p = N(-0.2, 1.3^2) per element
  const double mu_q = 0.3, s_q = 0.8, mu_p = -0.2, s_p = 1.3;
  const double closed = std::log(s_p / s_q) +
                        (s_q * s_q + (mu_q - mu_p) * (mu_q - mu_p)) / (2 * s_p * s_p) - 0.5;
  nn::Pcg32 rng(123);
  const int draws = 100000;
  double acc = 0.0;
  for (int d = 0; d < draws; ++d) {
    double z = mu_q + s_q * rng.normal();
    double log_q = -0.5 * std::log(2 * M_PI) - std::log(s_q) -
                   0.5 * (z - mu_q) * (z - mu_q) / (s_q * s_q);
    double log_p = -0.5 * std::log(2 * M_PI) - std::log(s_p) -
                   0.5 * (z - mu_p) * (z - mu_p) / (s_p * s_p);
    acc += log_q - log_p;
  }
  CHECK(acc / draws == doctest::Approx(closed).epsilon(0.02));

  // and the tape-side estimator agrees with the scalar formula on one draw
  Tape<float> tp;
  model::GaussianIds q{tp.constant_fill(Shape::scalar(), float(mu_q)),
                       tp.constant_fill(Shape::scalar(), float(std::log(s_q)))};
  model::GaussianIds p{tp.constant_fill(Shape::scalar(), float(mu_p)),
                       tp.constant_fill(Shape::scalar(), float(std::log(s_p)))};
  int z = tp.constant_fill(Shape::scalar(), 0.55f);
  int logdet = tp.constant_fill(Shape::scalar(), 0.0f);
  double log_q = -0.5 * std::log(2 * M_PI) - std::log(s_q) -
                 0.5 * (0.55 - mu_q) * (0.55 - mu_q) / (s_q * s_q);
  double log_p = -0.5 * std::log(2 * M_PI) - std::log(s_p) -
                 0.5 * (0.55 - mu_p) * (0.55 - mu_p) / (s_p * s_p);
  CHECK(tp.scalar_value(model::build_kl(tp, q, z, p, z, logdet, 1.0)) ==
        doctest::Approx(log_q - log_p).epsilon(1e-4));
}

TEST_CASE("decoder: length contract and stage arithmetic") {
  ModelConfig cfg;
  Model m(cfg, 0);
  const int T = 126;
  auto z = randn(size_t(192) * T, 55, 0.5);
  auto spk = randn(256, 56, 0.3);

  Tape<float> tp;
  GraphCtx ctx(tp, m.gen_params());
  int zi = tp.constant(Shape::mat(192, T), z.data());
  int si = tp.constant(Shape::mat(256, 1), spk.data());
  auto dec = m.build_decoder_msistft(ctx, zi, si);
  // 126 -> 504 -> 1008 sub-frames; 1008 * 4 = 4032 per stream; x4 = 16128
  CHECK(dec.sub_frames == 1008);
  CHECK(tp.shape(dec.mag[0]) == Shape::mat(9, 1008));
  CHECK(tp.shape(dec.wav) == Shape::mat(1, 16128));
  for (int s = 0; s < 4; ++s) {
    const float* mg = tp.val(dec.mag[s]);
    for (size_t i = 0; i < size_t(9) * 1008; ++i) CHECK(mg[i] >= 0.0f);
    const float* ph = tp.val(dec.phase[s]);
    for (size_t i = 0; i < size_t(9) * 1008; ++i) {
      CHECK(ph[i] <= float(M_PI) + 1e-6f);
      CHECK(ph[i] >= -float(M_PI) - 1e-6f);
    }
  }

  // identical z -> identical output
  Tape<float> tp2;
  GraphCtx ctx2(tp2, m.gen_params());
  auto dec2 = m.build_decoder_msistft(
      ctx2, tp2.constant(Shape::mat(192, T), z.data()),
      tp2.constant(Shape::mat(256, 1), spk.data()));
  CHECK(std::memcmp(tp.val(dec.wav), tp2.val(dec2.wav), size_t(16128) * 4) == 0);
}

TEST_CASE("decoder: zero raw magnitudes decode to unit magnitudes and nonzero audio") {
  ModelConfig cfg;
  Model m(cfg, 0);
  for (auto& p : m.gen_params().params())
    if (p.name.rfind("dec.out.", 0) == 0) std::fill(p.value.begin(), p.value.end(), 0.0f);

  const int T = 8;
  auto z = randn(size_t(192) * T, 5, 0.5);
  auto spk = randn(256, 6, 0.3);
  Tape<float> tp;
  GraphCtx ctx(tp, m.gen_params());
  auto dec = m.build_decoder_msistft(ctx, tp.constant(Shape::mat(192, T), z.data()),
                                     tp.constant(Shape::mat(256, 1), spk.data()));
  const float* mg = tp.val(dec.mag[0]);
  for (size_t i = 0; i < size_t(9) * 8 * T; ++i) CHECK(mg[i] == 1.0f);
  double energy = 0;
  for (int i = 0; i < 128 * T; ++i) energy += double(tp.val(dec.wav)[i]) * tp.val(dec.wav)[i];
  CHECK(energy > 0.0);
}

TEST_CASE("decoder: differentiable synthesis matches the dsp reference path") {
  ModelConfig cfg;
  Model m(cfg, 0);
  const int T = 16;
  auto z = randn(size_t(192) * T, 91, 0.5);
  auto spk = randn(256, 92, 0.3);

  Tape<float> tp;
  GraphCtx ctx(tp, m.gen_params());
  auto dec = m.build_decoder_msistft(ctx, tp.constant(Shape::mat(192, T), z.data()),
                                     tp.constant(Shape::mat(256, 1), spk.data()));

  // rebuild each sub-band with the dsp istft, then the dsp filterbank
  dsp::StftConfig sub_cfg;
  sub_cfg.n_fft = 16;
  sub_cfg.win_length = 16;
  sub_cfg.hop_length = 4;
  const int F = dec.sub_frames;
  dsp::SubbandSignals subs;
  subs.num_streams = 4;
  subs.stream_len = size_t(4) * F;
  subs.values.resize(size_t(4) * 4 * F);
  for (int s = 0; s < 4; ++s) {
    dsp::ComplexSpectrogram spec;
    spec.frames = F;
    spec.bins = 9;
    spec.values.resize(size_t(F) * 9);
    const float* mg = tp.val(dec.mag[s]);
    const float* ph = tp.val(dec.phase[s]);
    for (int t = 0; t < F; ++t)
      for (int k = 0; k < 9; ++k) {
        double mag = mg[size_t(k) * F + t];
        double phase = ph[size_t(k) * F + t];
        spec.at(t, k) = {mag * std::cos(phase), mag * std::sin(phase)};
      }
    auto wav = dsp::istft(spec, sub_cfg, subs.stream_len);
    std::memcpy(subs.stream(s), wav.samples.data(), subs.stream_len * 4);
  }
  auto full = dsp::pqmf_synthesize(subs, m.pqmf());

  const float* got = tp.val(dec.wav);
  double max_abs = 0, max_err = 0;
  for (int i = 0; i < 128 * T; ++i) {
    max_abs = std::max(max_abs, std::fabs(double(full.samples[i])));
    max_err = std::max(max_err, std::fabs(double(full.samples[i]) - got[i]));
  }
  INFO("max_abs=", max_abs, " max_err=", max_err);
  CHECK(max_err < 1e-3 * std::max(max_abs, 1.0));
}

TEST_CASE("baseline decoder: length, determinism, matched parameter count") {
  ModelConfig cfg;
  Model m(cfg, 0);
  const int T = 126;
  auto z = randn(size_t(192) * T, 14, 0.5);
  auto spk = randn(256, 15, 0.3);

  Tape<float> tp;
  GraphCtx bctx(tp, m.baseline_params());
  int wav = m.build_decoder_baseline(bctx, tp.constant(Shape::mat(192, T), z.data()),
                                     tp.constant(Shape::mat(256, 1), spk.data()));
  CHECK(tp.shape(wav) == Shape::mat(1, 16128));

  Tape<float> tpb;
  GraphCtx bctx2(tpb, m.baseline_params());
  int wav2 = m.build_decoder_baseline(bctx2, tpb.constant(Shape::mat(192, T), z.data()),
                                      tpb.constant(Shape::mat(256, 1), spk.data()));
  CHECK(std::memcmp(tp.val(wav), tpb.val(wav2), size_t(16128) * 4) == 0);

  const double ms = double(m.msistft_decoder_params());
  const double bl = double(m.baseline_decoder_params());
  INFO("msistft params=", ms, " baseline params=", bl);
  CHECK(std::fabs(bl - ms) / ms < 0.10);
}

TEST_CASE("discriminator: strided score lengths and feature count") {
  ModelConfig cfg;
  Model m(cfg, 0);
  auto wav = randn(16128, 3, 0.1);
  Tape<float> tp;
  GraphCtx ctx(tp, m.disc_params());
  auto d = m.build_discriminator(ctx, tp.constant(Shape::mat(1, 16128), wav.data()));
  REQUIRE(d.scores.size() == 2);
  CHECK(tp.shape(d.scores[0]) == Shape::mat(1, 252));   // 16128 -> /4 /4 /4
  CHECK(tp.shape(d.scores[1]) == Shape::mat(1, 126));   // pooled 8064 -> /4 /4 /4
  CHECK(d.features.size() == 10);                       // 2 scales x 5 layers

  Tape<float> tp2;
  GraphCtx ctx2(tp2, m.disc_params());
  auto d2 = m.build_discriminator(ctx2, tp2.constant(Shape::mat(1, 16128), wav.data()));
  CHECK(std::memcmp(tp.val(d.scores[0]), tp2.val(d2.scores[0]), 252 * 4) == 0);
}

TEST_CASE("losses: identity and unit cases") {
  ModelConfig cfg;
  Model m(cfg, 0);
  Tape<float> tp;

  auto a = randn(size_t(33) * 80, 71);
  int ai = tp.constant(Shape::mat(33, 80), a.data());
  CHECK(tp.scalar_value(model::l1_loss(tp, ai, ai)) == 0.0f);

  // D == 1 on generated audio -> zero generator adversarial loss
  model::DiscIds fake;
  fake.scores = {tp.constant_fill(Shape::mat(1, 10), 1.0f),
                 tp.constant_fill(Shape::mat(1, 5), 1.0f)};
  CHECK(tp.scalar_value(model::adversarial_g_loss(tp, fake)) == 0.0f);

  // identical hidden features -> zero feature-matching loss
  model::DiscIds real;
  real.features = {ai, ai};
  model::DiscIds fake2;
  fake2.features = {ai, ai};
  CHECK(tp.scalar_value(model::feature_matching_loss(tp, real, fake2)) == 0.0f);

  // generated == real: L_disc = mean(D(x)-1)^2 + mean D(x)^2
  auto wav = randn(4096, 81, 0.1);
  Tape<float> tp3;
  GraphCtx ctx3(tp3, m.disc_params());
  int wi = tp3.constant(Shape::mat(1, 4096), wav.data());
  auto dr = m.build_discriminator(ctx3, wi);
  auto df = m.build_discriminator(ctx3, wi);
  float fm = tp3.scalar_value(model::feature_matching_loss(tp3, dr, df));
  CHECK(fm == 0.0f);
  float ld = tp3.scalar_value(model::discriminator_loss(tp3, dr, df));
  double expect = 0;
  for (int s = 0; s < 2; ++s) {
    const float* sc = tp3.val(dr.scores[s]);
    size_t n = tp3.shape(dr.scores[s]).numel();
    double m1 = 0, m2 = 0;
    for (size_t i = 0; i < n; ++i) {
      m1 += (double(sc[i]) - 1) * (double(sc[i]) - 1);
      m2 += double(sc[i]) * sc[i];
    }
    expect += m1 / n + m2 / n;
  }
  CHECK(ld == doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("checkpoint: save/load round trip is bitwise for inference") {
  namespace fs = std::filesystem;
  ModelConfig cfg = tiny_config();
  Model m(cfg, 1);
  randomize_flow_outputs(m, 2);

  const int T = 3;
  auto z = randn(size_t(cfg.d_z) * T, 3);
  auto c = randn(size_t(cfg.cond.total()) * T, 4);
  auto run = [&](Model& mm) {
    Tape<float> tp;
    GraphCtx ctx(tp, mm.gen_params());
    int zi = tp.constant(Shape::mat(cfg.d_z, T), z.data());
    int ci = tp.constant(Shape::mat(cfg.cond.total(), T), c.data());
    auto out = mm.build_flow_forward(ctx, zi, ci);
    return std::vector<float>(tp.val(out.z), tp.val(out.z) + z.size());
  };
  auto before = run(m);

  auto path = (fs::temp_directory_path() / "svc_model_ckpt.rasv").string();
  m.save_checkpoint(path, 42);

  Model m2(cfg, 999);  // different init
  CHECK(m2.load_checkpoint(path) == 42);
  auto after = run(m2);
  CHECK(std::memcmp(before.data(), after.data(), before.size() * 4) == 0);

  // dimension mismatch is a CheckpointError
  ModelConfig other = tiny_config();
  other.d_z = 8;
  Model m3(other, 0);
  try {
    m3.load_checkpoint(path);
    FAIL("expected CheckpointError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CheckpointError);
  }
  fs::remove(path);
}
