#include "model/model.hpp"

#include <cmath>

#include "common/error.hpp"
#include "nn/serialize.hpp"

namespace svc::model {

using nn::Shape;

Model::Model(const ModelConfig& cfg, uint64_t seed)
    : cfg_(cfg),
      mel_graph_(cfg.stft, cfg.mel_bands, cfg.sample_rate),
      pqmf_(cfg.streams) {
  register_all(seed);

  // inverse DFT matrices for the sub-band synthesis; conjugate-pair weights
  // fold the one-sided spectrum, sin(0)=sin(pi j)=0 drops the DC/Nyquist
  // imaginary parts exactly as the reference istft does
  const int n = cfg_.sub_fft, bins = cfg_.sub_bins();
  idft_re_.resize(size_t(n) * bins);
  idft_im_.resize(size_t(n) * bins);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < bins; ++k) {
      double c = (k == 0 || k == bins - 1) ? 1.0 : 2.0;
      double ang = 2.0 * M_PI * double(j) * k / double(n);
      idft_re_[size_t(j) * bins + k] = float(c * std::cos(ang) / n);
      idft_im_[size_t(j) * bins + k] = float(-c * std::sin(ang) / n);
    }
  }
  auto w = dsp::make_window(dsp::WindowKind::hann_periodic, n);
  sub_window_.assign(w.begin(), w.end());

  // synthesis filterbank as a fixed transposed conv: kernel flipped, scaled
  // by the stream count; output trimmed by the filter center afterwards
  const int taps = pqmf_.taps();
  pqmf_weights_.resize(size_t(cfg_.streams) * taps);
  for (int s = 0; s < cfg_.streams; ++s)
    for (int k = 0; k < taps; ++k)
      pqmf_weights_[size_t(s) * taps + k] =
          float(cfg_.streams * pqmf_.synthesis_filter(s)[taps - 1 - k]);
}

void Model::register_all(uint64_t seed) {
  nn::Pcg32 rng(seed, 0x5eedULL);
  const int h = cfg_.hidden;
  const int half = cfg_.d_z / 2;
  const int cond_dim = cfg_.cond.total();

  features::register_condition_params(gen_, cfg_.cond, rng);

  // posterior encoder
  register_conv(gen_, "post.pre", h, cfg_.spec_bins, 1, rng);
  register_wavenet(gen_, {"post.wn", h, cfg_.posterior_layers, cfg_.posterior_kernel, 0}, rng);
  register_conv(gen_, "post.proj", 2 * cfg_.d_z, h, 1, rng);

  // flow: coupling blocks with zero-initialized output projections
  for (int b = 0; b < cfg_.flow_blocks; ++b) {
    const std::string bp = "flow.b" + std::to_string(b);
    register_conv(gen_, bp + ".pre", h, half, 1, rng);
    register_wavenet(gen_, {bp + ".wn", h, cfg_.flow_layers, cfg_.flow_kernel, cond_dim}, rng);
    register_conv(gen_, bp + ".post", cfg_.d_z, h, 1, rng, /*zero_init=*/true);
  }

  // prior network over the conditions
  register_conv(gen_, "prior.pre", h, cond_dim, 1, rng);
  for (int l = 0; l < cfg_.prior_layers; ++l)
    register_conv(gen_, "prior.l" + std::to_string(l), h, h, cfg_.prior_kernel, rng);
  register_conv(gen_, "prior.proj", 2 * cfg_.d_z, h, 1, rng);

  // MS-iSTFT decoder
  {
    const int w0 = cfg_.decoder_width, w1 = w0 / 2, w2 = w0 / 4;
    gen_.add_kaiming("dec.spk.w", Shape::mat(cfg_.d_z, cfg_.cond.speaker),
                     cfg_.cond.speaker, rng);
    gen_.add("dec.spk.b", Shape::mat(cfg_.d_z, 1));
    register_conv(gen_, "dec.pre", w0, cfg_.d_z, 7, rng);
    register_tconv(gen_, "dec.up1", w0, w1, 8, rng);
    register_resblock(gen_, "dec.rb1", w1, rng);
    register_tconv(gen_, "dec.up2", w1, w2, 4, rng);
    register_resblock(gen_, "dec.rb2", w2, rng);
    register_conv(gen_, "dec.out", cfg_.streams * 3 * cfg_.sub_bins(), w2, 7, rng);
    // start the predicted sub-band magnitudes near real audio scale instead
    // of exp(0); saves hundreds of steps of pure gain adjustment
    {
      auto& b = gen_.get("dec.out.b");
      for (int s = 0; s < cfg_.streams; ++s)
        for (int k = 0; k < cfg_.sub_bins(); ++k)
          b.value[size_t(s) * 3 * cfg_.sub_bins() + k] = -3.0f;
    }
  }

  // baseline decoder: conventional transposed-conv upsampling to full rate
  {
    const int c0 = cfg_.baseline_width;
    baseline_.add_kaiming("bdec.spk.w", Shape::mat(cfg_.d_z, cfg_.cond.speaker),
                          cfg_.cond.speaker, rng);
    baseline_.add("bdec.spk.b", Shape::mat(cfg_.d_z, 1));
    register_conv(baseline_, "bdec.pre", c0, cfg_.d_z, 7, rng);
    const int kernels[4] = {16, 8, 4, 4};
    int ch = c0;
    for (int i = 0; i < 4; ++i) {
      register_tconv(baseline_, "bdec.up" + std::to_string(i), ch, ch / 2, kernels[i], rng);
      ch /= 2;
      register_resblock(baseline_, "bdec.rb" + std::to_string(i), ch, rng);
    }
    register_conv(baseline_, "bdec.out", 1, ch, 7, rng);
  }

  // two scale discriminators
  for (int s = 0; s < 2; ++s) {
    const std::string sp = "disc.s" + std::to_string(s);
    register_conv(disc_, sp + ".l0", 16, 1, 15, rng);
    register_conv(disc_, sp + ".l1", 32, 16, 21, rng);
    register_conv(disc_, sp + ".l2", 64, 32, 21, rng);
    register_conv(disc_, sp + ".l3", 128, 64, 21, rng);
    register_conv(disc_, sp + ".l4", 128, 128, 5, rng);
    register_conv(disc_, sp + ".score", 1, 128, 3, rng);
  }
}

GaussianIds Model::build_posterior(GraphCtx& ctx, int x_lin) {
  auto& tp = ctx.tp;
  if (tp.shape(x_lin).rows() != cfg_.spec_bins)
    raise(ErrorKind::ShapeError, "posterior: expected " + std::to_string(cfg_.spec_bins) +
                                     " spectrogram bins, got " +
                                     std::to_string(tp.shape(x_lin).rows()));
  int x = conv(ctx, "post.pre", x_lin, nn::ConvSpec{1, 0, 1});
  x = build_wavenet(ctx, {"post.wn", cfg_.hidden, cfg_.posterior_layers,
                          cfg_.posterior_kernel, 0}, x, -1);
  int proj = conv(ctx, "post.proj", x, nn::ConvSpec{1, 0, 1});
  auto [mu, logs] = tp.split_rows(proj, cfg_.d_z);
  return {mu, tp.clamp(logs, cfg_.log_sigma_min, cfg_.log_sigma_max)};
}

GaussianIds Model::build_prior(GraphCtx& ctx, int cond) {
  auto& tp = ctx.tp;
  const int pad = (cfg_.prior_kernel - 1) / 2;
  int x = conv(ctx, "prior.pre", cond, nn::ConvSpec{1, 0, 1});
  for (int l = 0; l < cfg_.prior_layers; ++l)
    x = tp.leaky_relu(conv(ctx, "prior.l" + std::to_string(l), x, nn::ConvSpec{1, pad, 1}),
                      0.1f);
  int proj = conv(ctx, "prior.proj", x, nn::ConvSpec{1, 0, 1});
  auto [mu, logs] = tp.split_rows(proj, cfg_.d_z);
  return {mu, tp.clamp(logs, cfg_.log_sigma_min, cfg_.log_sigma_max)};
}

int Model::build_sub_istft(nn::Tape<float>& tp, int re, int im) {
  const int n = cfg_.sub_fft, bins = cfg_.sub_bins(), hop = cfg_.sub_hop;
  const int F = tp.shape(re).cols();
  const int out_len = F * hop;

  int a_mat = tp.constant(Shape::mat(n, bins), idft_re_.data());
  int b_mat = tp.constant(Shape::mat(n, bins), idft_im_.data());
  int frames = tp.add(tp.matmul(a_mat, re), tp.matmul(b_mat, im));  // (n, F)
  int win = tp.constant(Shape::mat(n, 1), sub_window_.data());
  int windowed = tp.mul(frames, win);

  auto& table = ola_tables_[F];
  auto& inv_norm = ola_inv_norm_[F];
  if (!table) {
    table = std::make_shared<std::vector<int64_t>>(size_t(n) * F);
    std::vector<double> norm(out_len, 0.0);
    for (int j = 0; j < n; ++j) {
      for (int f = 0; f < F; ++f) {
        int64_t pos = int64_t(f) * hop + j - n / 2;
        bool in = pos >= 0 && pos < out_len;
        (*table)[size_t(j) * F + f] = in ? pos : -1;
        if (in) norm[pos] += double(sub_window_[j]) * sub_window_[j];
      }
    }
    inv_norm.resize(out_len);
    for (int i = 0; i < out_len; ++i)
      inv_norm[i] = float(1.0 / std::max(norm[i], 1e-8));
  }

  int ola = tp.overlap_add(windowed, table, out_len);  // (1, out_len)
  int norm_row = tp.constant(Shape::mat(1, out_len), inv_norm.data());
  return tp.mul(ola, norm_row);
}

DecoderIds Model::build_decoder_msistft(GraphCtx& ctx, int z, int speaker) {
  auto& tp = ctx.tp;
  const int T = tp.shape(z).cols();
  const int bins = cfg_.sub_bins();

  int spk = tp.add(tp.matmul(ctx.p("dec.spk.w"), speaker), ctx.p("dec.spk.b"));
  int x = tp.add(z, spk);  // column broadcast over frames
  x = conv(ctx, "dec.pre", x, nn::ConvSpec{1, 3, 1});
  x = tconv(ctx, "dec.up1", tp.leaky_relu(x, 0.1f), 4, 2);
  x = build_resblock(ctx, "dec.rb1", x, cfg_.decoder_width / 2);
  x = tconv(ctx, "dec.up2", tp.leaky_relu(x, 0.1f), 2, 1);
  x = build_resblock(ctx, "dec.rb2", x, cfg_.decoder_width / 4);
  int out = conv(ctx, "dec.out", tp.leaky_relu(x, 0.1f), nn::ConvSpec{1, 3, 1});

  DecoderIds ids;
  ids.sub_frames = tp.shape(out).cols();  // 8*T
  const int F = ids.sub_frames;

  // The network predicts phase relative to each bin's natural advance of
  // 2*pi*k*hop/n_fft per frame. With this carrier folded in, a locally
  // constant prediction already yields a coherent tone at the bin center;
  // without it the frame-rate comb is a strong early optimum.
  std::vector<float> carrier(size_t(bins) * F);
  for (int k = 0; k < bins; ++k)
    for (int f = 0; f < F; ++f)
      carrier[size_t(k) * F + f] =
          float(2.0 * M_PI * double((int64_t(k) * f * cfg_.sub_hop) % cfg_.sub_fft) /
                cfg_.sub_fft);
  int carrier_id = tp.constant(Shape::mat(bins, F), carrier.data());

  std::vector<int> streams;
  for (int s = 0; s < cfg_.streams; ++s) {
    const int base = s * 3 * bins;
    int raw_mag = tp.slice_rows(out, base, base + bins);
    int px = tp.slice_rows(out, base + bins, base + 2 * bins);
    int py = tp.slice_rows(out, base + 2 * bins, base + 3 * bins);
    int mag = tp.exp_op(raw_mag);
    int phase_abs = tp.add(tp.atan2_op(py, px), carrier_id);
    int cosp = tp.cos_op(phase_abs);
    int sinp = tp.sin_op(phase_abs);
    int re = tp.mul(mag, cosp);
    int im = tp.mul(mag, sinp);
    ids.mag.push_back(mag);
    ids.phase.push_back(tp.atan2_op(sinp, cosp));  // wrapped to (-pi, pi]
    streams.push_back(build_sub_istft(tp, re, im));  // (1, 32*T)
  }
  int stacked = tp.concat_rows(streams);  // (streams, 32*T)

  const int taps = pqmf_.taps();
  int w = tp.constant(Shape::cube(cfg_.streams, 1, taps), pqmf_weights_.data());
  int full = tp.tconv1d(stacked, w, -1, cfg_.streams, 0);  // (1, 128*T + taps - S)
  // trim the filter group delay back to exactly 128*T samples
  const int want = cfg_.samples_per_frame() * T;
  const int trim = (taps - 1) / 2;
  auto idx = std::make_shared<std::vector<int64_t>>(want);
  for (int i = 0; i < want; ++i) (*idx)[i] = trim + i;
  ids.wav = tp.take(full, idx, Shape::mat(1, want));
  return ids;
}

int Model::build_decoder_baseline(GraphCtx& ctx, int z, int speaker) {
  auto& tp = ctx.tp;
  int spk = tp.add(tp.matmul(ctx.p("bdec.spk.w"), speaker), ctx.p("bdec.spk.b"));
  int x = tp.add(z, spk);
  x = conv(ctx, "bdec.pre", x, nn::ConvSpec{1, 3, 1});
  const int strides[4] = {8, 4, 2, 2};
  const int pads[4] = {4, 2, 1, 1};
  int ch = cfg_.baseline_width;
  for (int i = 0; i < 4; ++i) {
    x = tconv(ctx, "bdec.up" + std::to_string(i), tp.leaky_relu(x, 0.1f), strides[i], pads[i]);
    ch /= 2;
    x = build_resblock(ctx, "bdec.rb" + std::to_string(i), x, ch);
  }
  int out = conv(ctx, "bdec.out", tp.leaky_relu(x, 0.1f), nn::ConvSpec{1, 3, 1});
  return tp.tanh_op(out);
}

int Model::build_disc_scale(GraphCtx& ctx, int scale, int wav, DiscIds& out) {
  auto& tp = ctx.tp;
  const std::string sp = "disc.s" + std::to_string(scale);
  struct L { const char* name; nn::ConvSpec cs; };
  const L layers[5] = {
      {".l0", {1, 7, 1}}, {".l1", {4, 10, 1}}, {".l2", {4, 10, 1}},
      {".l3", {4, 10, 1}}, {".l4", {1, 2, 1}}};
  int x = wav;
  for (const auto& l : layers) {
    x = tp.leaky_relu(conv(ctx, sp + l.name, x, l.cs), 0.1f);
    out.features.push_back(x);
  }
  return conv(ctx, sp + ".score", x, nn::ConvSpec{1, 1, 1});
}

DiscIds Model::build_discriminator(GraphCtx& ctx, int wav) {
  auto& tp = ctx.tp;
  DiscIds out;
  out.scores.push_back(build_disc_scale(ctx, 0, wav, out));
  // x2 average pooling for the second scale
  static const float pool_w[4] = {0.25f, 0.25f, 0.25f, 0.25f};
  int pw = tp.constant(Shape::cube(1, 1, 4), pool_w);
  int pooled = tp.conv1d(wav, pw, -1, nn::ConvSpec{2, 1, 1});
  out.scores.push_back(build_disc_scale(ctx, 1, pooled, out));
  return out;
}

int Model::reparameterize(nn::Tape<float>& tp, const GaussianIds& g, uint64_t seed,
                          float noise_scale) const {
  const Shape shp = tp.shape(g.mu);
  std::vector<float> eps(shp.numel());
  nn::Pcg32 rng(seed, 0xE9A5ULL);
  for (auto& e : eps) e = float(rng.normal());
  int eps_id = tp.constant(shp, eps.data());
  int sigma = tp.exp_op(g.log_sigma);
  if (noise_scale != 1.0f) sigma = tp.scale(sigma, noise_scale);
  return tp.add(g.mu, tp.mul(sigma, eps_id));
}

size_t Model::param_count_with_prefix(const nn::ParamStore& store,
                                      const std::string& prefix) const {
  size_t n = 0;
  for (const auto& p : store.params())
    if (p.name.rfind(prefix, 0) == 0) n += p.value.size();
  return n;
}

void Model::save_checkpoint(const std::string& path, uint64_t global_step) const {
  std::vector<nn::NamedTensor> tensors;
  auto dump = [&](const nn::ParamStore& store, const std::string& prefix) {
    for (const auto& p : store.params())
      tensors.push_back({prefix + p.name, p.shape, p.value});
  };
  dump(gen_, "gen.");
  dump(disc_, "disc.");
  dump(baseline_, "baseline.");
  nn::write_rasv(path, global_step, tensors);
}

uint64_t Model::load_checkpoint(const std::string& path) {
  auto [step, tensors] = nn::read_rasv(path);
  std::map<std::string, const nn::NamedTensor*> byname;
  for (const auto& t : tensors) byname[t.name] = &t;

  size_t used = 0;
  auto restore = [&](nn::ParamStore& store, const std::string& prefix) {
    for (auto& p : store.params()) {
      auto it = byname.find(prefix + p.name);
      if (it == byname.end())
        raise(ErrorKind::CheckpointError, "checkpoint missing tensor: " + prefix + p.name);
      if (!(it->second->shape == p.shape))
        raise(ErrorKind::CheckpointError,
              "checkpoint/config shape mismatch for: " + prefix + p.name);
      p.value = it->second->values;
      ++used;
    }
  };
  restore(gen_, "gen.");
  restore(disc_, "disc.");
  restore(baseline_, "baseline.");
  if (used != tensors.size())
    raise(ErrorKind::CheckpointError, "checkpoint holds unknown tensors");
  return step;
}

}  // namespace svc::model
