#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "dsp/pqmf.hpp"
#include "features/conditions.hpp"
#include "model/mel_graph.hpp"
#include "model/modules.hpp"
#include "nn/param_store.hpp"

namespace svc::model {

struct ModelConfig {
  int spec_bins = 257;
  int d_z = 192;
  int hidden = 192;
  int posterior_layers = 8;
  int posterior_kernel = 5;
  int flow_blocks = 4;
  int flow_layers = 2;
  int flow_kernel = 5;
  int prior_layers = 4;
  int prior_kernel = 5;
  int decoder_width = 192;
  int streams = 4;
  int sub_fft = 16;
  int sub_hop = 4;
  int baseline_width = 160;
  float log_sigma_min = -9.0f;
  float log_sigma_max = 2.0f;
  int mel_bands = 80;
  int sample_rate = 16000;
  dsp::StftConfig stft;
  features::ConditionDims cond;

  int sub_bins() const { return sub_fft / 2 + 1; }
  // latent frame -> waveform samples: x4 and x2 upsampling, sub-band hop,
  // stream interleave
  int samples_per_frame() const { return 4 * 2 * sub_hop * streams; }
};

struct GaussianIds {
  int mu = -1;
  int log_sigma = -1;
};

struct FlowIds {
  int z = -1;
  int logdet = -1;
};

// Test hook: scales one block's log-scale output.
struct FlowHook {
  int block = -1;
  float log_s_scale = 1.0f;
};

struct DecoderIds {
  int wav = -1;              // (1, 128*T)
  std::vector<int> mag;      // per stream (sub_bins, 8*T)
  std::vector<int> phase;    // per stream, radians in (-pi, pi]
  int sub_frames = 0;        // 8*T
};

struct DiscIds {
  std::vector<int> scores;    // per sub-discriminator
  std::vector<int> features;  // all hidden activations, outer order = scale
};

class Model {
 public:
  Model(const ModelConfig& cfg, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore& gen_params() { return gen_; }
  nn::ParamStore& disc_params() { return disc_; }
  nn::ParamStore& baseline_params() { return baseline_; }
  const dsp::PqmfBank& pqmf() const { return pqmf_; }

  GaussianIds build_posterior(GraphCtx& ctx, int x_lin);

  // Flow builders are scalar-generic: the float instantiation trains and
  // converts, the double one backs the Jacobian-determinant and round-trip
  // precision checks.
  template <class S>
  FlowIds build_flow_forward(GraphCtxT<S>& ctx, int z, int cond, const FlowHook& hook = {}) {
    auto& tp = ctx.tp;
    if (cond >= 0 && tp.shape(z).cols() != tp.shape(cond).cols())
      raise(ErrorKind::ShapeError, "flow: latent/condition frame mismatch");
    int logdet = tp.constant_fill(nn::Shape::scalar(), S(0));
    const int half = cfg_.d_z / 2;
    for (int b = 0; b < cfg_.flow_blocks; ++b) {
      auto [x_a, x_b] = tp.split_rows(z, half);
      auto [m, log_s] = build_coupling(ctx, b, x_a, cond);
      if (hook.block == b) log_s = tp.scale(log_s, S(hook.log_s_scale));
      int x_b2 = tp.add(m, tp.mul(x_b, tp.exp_op(log_s)));
      logdet = tp.add(logdet, tp.sum_all(log_s));
      z = flip_rows(tp, tp.concat_rows({x_a, x_b2}));
    }
    return {z, logdet};
  }

  template <class S>
  int build_flow_inverse(GraphCtxT<S>& ctx, int z_p, int cond) {
    auto& tp = ctx.tp;
    const int half = cfg_.d_z / 2;
    int z = z_p;
    for (int b = cfg_.flow_blocks - 1; b >= 0; --b) {
      z = flip_rows(tp, z);  // the flip is its own inverse
      auto [x_a, x_b2] = tp.split_rows(z, half);
      auto [m, log_s] = build_coupling(ctx, b, x_a, cond);
      int x_b = tp.mul(tp.add(x_b2, tp.scale(m, S(-1))), tp.exp_op(tp.scale(log_s, S(-1))));
      z = tp.concat_rows({x_a, x_b});
    }
    return z;
  }

  GaussianIds build_prior(GraphCtx& ctx, int cond);
  DecoderIds build_decoder_msistft(GraphCtx& ctx, int z, int speaker);
  int build_decoder_baseline(GraphCtx& ctx, int z, int speaker);
  DiscIds build_discriminator(GraphCtx& ctx, int wav);
  int build_mel(nn::Tape<float>& tp, int wav, int num_samples) {
    return mel_graph_.build(tp, wav, num_samples);
  }

  // z = mu + noise_scale * sigma * eps with seeded eps
  int reparameterize(nn::Tape<float>& tp, const GaussianIds& g, uint64_t seed,
                     float noise_scale = 1.0f) const;

  size_t param_count_with_prefix(const nn::ParamStore& store, const std::string& prefix) const;
  size_t msistft_decoder_params() const { return param_count_with_prefix(gen_, "dec."); }
  size_t baseline_decoder_params() const {
    return param_count_with_prefix(baseline_, "bdec.");
  }

  void save_checkpoint(const std::string& path, uint64_t global_step) const;
  uint64_t load_checkpoint(const std::string& path);

 private:
  ModelConfig cfg_;
  nn::ParamStore gen_, disc_, baseline_;
  MelGraph mel_graph_;
  dsp::PqmfBank pqmf_;

  std::vector<float> idft_re_, idft_im_;  // (sub_fft, sub_bins)
  std::vector<float> sub_window_;         // (sub_fft, 1)
  std::vector<float> pqmf_weights_;       // (streams, 1, taps)
  std::map<int, std::shared_ptr<std::vector<int64_t>>> ola_tables_;
  std::map<int, std::vector<float>> ola_inv_norm_;

  void register_all(uint64_t seed);

  template <class S>
  std::pair<int, int> build_coupling(GraphCtxT<S>& ctx, int block, int x_a, int cond) {
    auto& tp = ctx.tp;
    const std::string bp = "flow.b" + std::to_string(block);
    int h = conv(ctx, bp + ".pre", x_a, nn::ConvSpec{1, 0, 1});
    h = build_wavenet(ctx, {bp + ".wn", cfg_.hidden, cfg_.flow_layers, cfg_.flow_kernel,
                            cfg_.cond.total()}, h, cond);
    int out = conv(ctx, bp + ".post", h, nn::ConvSpec{1, 0, 1});
    auto [m, log_s] = tp.split_rows(out, cfg_.d_z / 2);
    return {m, log_s};
  }

  int build_sub_istft(nn::Tape<float>& tp, int re, int im);
  int build_disc_scale(GraphCtx& ctx, int scale, int wav, DiscIds& out);
};

// ---- losses ----

// sum over elements of log N(x; mu, exp(log_sigma))
int gaussian_logprob_sum(nn::Tape<float>& tp, int x, int mu, int log_sigma);

// single-sample estimate (log q(z) - log p(z|c)) / denom, with
// log p = log N(z_p; p_mu, p_sigma) + logdet
int build_kl(nn::Tape<float>& tp, const GaussianIds& q, int z, const GaussianIds& p,
             int z_p, int logdet, double denom);

int l1_loss(nn::Tape<float>& tp, int a, int b);                     // mean |a - b|
int adversarial_g_loss(nn::Tape<float>& tp, const DiscIds& fake);   // sum_d mean (D-1)^2
int discriminator_loss(nn::Tape<float>& tp, const DiscIds& real, const DiscIds& fake);
int feature_matching_loss(nn::Tape<float>& tp, const DiscIds& real, const DiscIds& fake);

}  // namespace svc::model
