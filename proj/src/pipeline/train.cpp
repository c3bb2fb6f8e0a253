#include "pipeline/train.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "common/error.hpp"
#include "features/conditions.hpp"
#include "model/model.hpp"
#include "nn/adam.hpp"
#include "nn/serialize.hpp"

namespace svc::pipeline {

namespace fs = std::filesystem;

namespace {

// columns [c0, c0+w) of a channels-major (C, T) matrix
std::vector<float> slice_cols(const std::vector<float>& src, int C, int T, int c0, int w) {
  std::vector<float> out(size_t(C) * w);
  for (int c = 0; c < C; ++c)
    std::copy(src.begin() + size_t(c) * T + c0, src.begin() + size_t(c) * T + c0 + w,
              out.begin() + size_t(c) * w);
  return out;
}

// rows [r0, r0+n) of a rows-major (T, D) matrix
std::vector<float> slice_rows_major(const std::vector<float>& src, int D, int r0, int n) {
  return std::vector<float>(src.begin() + size_t(r0) * D, src.begin() + size_t(r0 + n) * D);
}

void append_moments(const std::string& prefix, nn::ParamStore& store, nn::Adam& adam,
                    std::vector<nn::NamedTensor>& out) {
  auto& params = store.params();
  for (size_t i = 0; i < params.size(); ++i) {
    out.push_back({prefix + params[i].name + ".m", params[i].shape, adam.moments_m()[i]});
    out.push_back({prefix + params[i].name + ".v", params[i].shape, adam.moments_v()[i]});
  }
  out.push_back({"opt." + prefix + "step", nn::Shape::vec(1), {float(adam.step_count())}});
}

void save_optimizer_state(const std::string& ckpt_path, uint64_t step,
                          nn::ParamStore& gen, nn::Adam& adam_g, nn::ParamStore& disc,
                          nn::Adam& adam_d) {
  std::vector<nn::NamedTensor> tensors;
  append_moments("gen.", gen, adam_g, tensors);
  append_moments("disc.", disc, adam_d, tensors);
  nn::write_rasv(ckpt_path + ".opt", step, tensors);
}

}  // namespace

TrainResult train(const PipelineConfig& cfg, const std::string& dataset_dir,
                  const std::string& out_dir, std::ostream* progress) {
  auto extracted = extract_features(cfg, dataset_dir);
  if (extracted.records.empty())
    raise(ErrorKind::InvalidInput, "train: dataset is empty or fully unreadable");

  const int W = cfg.segment_frames;
  const int hop = cfg.stft.hop_length;
  const int seg_samples = W * 128;
  std::vector<const UtteranceRecord*> usable;
  for (const auto& r : extracted.records)
    if (int(r.num_samples) >= seg_samples + hop) usable.push_back(&r);
  if (usable.empty())
    raise(ErrorKind::InvalidInput, "train: no utterance is long enough for a segment");

  fs::create_directories(out_dir);

  model::Model m(cfg.to_model_config(), cfg.seed);
  nn::Adam adam_g(m.gen_params(), cfg.adam_config());
  nn::Adam adam_d(m.disc_params(), cfg.adam_config());

  const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  std::ofstream metrics(metrics_path);
  if (!metrics) raise(ErrorKind::InvalidInput, "cannot write: " + metrics_path);
  metrics << "step,L_total,L_recon,L_kl,L_adv_G,L_fm,L_disc,logdet\n";

  std::string last_checkpoint;
  auto save_ckpt = [&](int64_t step) {
    char name[64];
    std::snprintf(name, sizeof(name), "ckpt_%06lld.rasv", (long long)step);
    const std::string path = (fs::path(out_dir) / name).string();
    m.save_checkpoint(path, uint64_t(step));
    save_optimizer_state(path, uint64_t(step), m.gen_params(), adam_g, m.disc_params(),
                         adam_d);
    const std::string latest = (fs::path(out_dir) / "latest.rasv").string();
    fs::copy_file(path, latest, fs::copy_options::overwrite_existing);
    fs::copy_file(path + ".opt", latest + ".opt", fs::copy_options::overwrite_existing);
    last_checkpoint = path;
  };
  save_ckpt(0);

  nn::Pcg32 batch_rng(cfg.seed, 0xBA7C4ULL);
  const int bins = cfg.stft.n_fft / 2 + 1;
  const int B = cfg.batch_size;

  for (int64_t step = 1; step <= cfg.total_steps; ++step) {
    // ---- sample the batch ----
    struct Item {
      const UtteranceRecord* rec;
      int start;  // frame offset
    };
    std::vector<Item> batch(B);
    for (int i = 0; i < B; ++i) {
      const auto* rec = usable[batch_rng.next_u32() % usable.size()];
      const int s_max = int((rec->num_samples - seg_samples) / hop);
      const int s_lim = std::min<int>(s_max, rec->frames - W - 1);
      batch[i] = {rec, int(batch_rng.next_u32() % uint32_t(s_lim + 1))};
    }

    // ---- generator graph (forward) ----
    nn::Tape<float> tg;
    nn::ParamBinder gen_binder(tg);
    model::GraphCtx gctx(tg, m.gen_params(), &gen_binder);
    auto cond_ids = features::bind_condition_params(tg, m.gen_params(), &gen_binder);

    std::vector<int> kl_nodes, recon_nodes, logdet_nodes, wav_nodes, real_nodes;
    for (int i = 0; i < B; ++i) {
      const auto& rec = *batch[i].rec;
      const int s = batch[i].start;

      auto xlin_v = slice_cols(rec.lin_mag, bins, rec.frames, s, W);
      int xlin = tg.constant(nn::Shape::mat(bins, W), xlin_v.data());

      auto content_full = features::content_channels_major(rec.content);
      auto content_v = slice_cols(content_full, rec.content.dim, rec.content.frames, s, W);
      int raw_content = tg.constant(nn::Shape::mat(rec.content.dim, W), content_v.data());
      int content = features::build_content_prenet(tg, raw_content, cond_ids);

      auto mel_full = features::mel_channels_major(rec.mel);
      int mel_id = tg.constant(nn::Shape::mat(rec.mel.mel_bands, rec.mel.frames),
                               mel_full.data());
      int speaker = features::build_speaker_graph(tg, mel_id, cond_ids.speaker_w,
                                                  cond_ids.speaker_b);

      int emotion = tg.constant(nn::Shape::mat(int(rec.emotion.size()), 1),
                                rec.emotion.data());

      auto rows_full = features::f0_embedding_rows(rec.f0);
      std::vector<int> rows(rows_full.begin() + s, rows_full.begin() + s + W);
      int f0ch = features::build_f0_channels(tg, cond_ids, rows);

      auto cg = features::assemble_conditions(tg, content, speaker, emotion, f0ch);

      auto q = m.build_posterior(gctx, xlin);
      uint64_t eps_seed = cfg.seed ^ (uint64_t(step) * 0x9E3779B1ULL + uint64_t(i));
      int z = m.reparameterize(tg, q, eps_seed);
      auto flow = m.build_flow_forward(gctx, z, cg.cond);
      auto prior = m.build_prior(gctx, cg.cond);
      kl_nodes.push_back(
          model::build_kl(tg, q, z, prior, flow.z, flow.logdet, double(cfg.d_z) * W));
      logdet_nodes.push_back(flow.logdet);

      auto dec = m.build_decoder_msistft(gctx, z, speaker);
      wav_nodes.push_back(dec.wav);

      int mel_gen = m.build_mel(tg, dec.wav, seg_samples);
      const int ref_frames = tg.shape(mel_gen).rows();
      auto mel_ref_v = slice_rows_major(rec.mel.values, rec.mel.mel_bands, s, ref_frames);
      int mel_ref = tg.constant(nn::Shape::mat(ref_frames, rec.mel.mel_bands),
                                mel_ref_v.data());
      recon_nodes.push_back(model::l1_loss(tg, mel_gen, mel_ref));

      std::vector<float> real_seg(rec.audio.begin() + size_t(s) * hop,
                                  rec.audio.begin() + size_t(s) * hop + seg_samples);
      real_nodes.push_back(tg.constant(nn::Shape::mat(1, seg_samples), real_seg.data()));
    }

    auto mean_of = [&](nn::Tape<float>& tp, const std::vector<int>& nodes) {
      int acc = nodes[0];
      for (size_t i = 1; i < nodes.size(); ++i) acc = tp.add(acc, nodes[i]);
      return tp.scale(acc, 1.0f / float(nodes.size()));
    };
    int kl = mean_of(tg, kl_nodes);
    int recon = mean_of(tg, recon_nodes);
    int logdet_mean = mean_of(tg, logdet_nodes);

    // ---- discriminator update (generated audio detached) ----
    nn::Tape<float> td;
    nn::ParamBinder disc_binder(td);
    model::GraphCtx dctx(td, m.disc_params(), &disc_binder);
    std::vector<int> dloss_nodes;
    for (int i = 0; i < B; ++i) {
      int real = td.constant(tg.shape(real_nodes[i]), tg.val(real_nodes[i]));
      int fake = td.constant(tg.shape(wav_nodes[i]), tg.val(wav_nodes[i]));
      auto d_real = m.build_discriminator(dctx, real);
      auto d_fake = m.build_discriminator(dctx, fake);
      dloss_nodes.push_back(model::discriminator_loss(td, d_real, d_fake));
    }
    int dloss = mean_of(td, dloss_nodes);
    td.backward(dloss);
    disc_binder.accumulate_grads();
    adam_d.step();

    // ---- generator losses against the updated discriminator ----
    model::GraphCtx dfrozen(tg, m.disc_params(), nullptr);
    std::vector<int> adv_nodes, fm_nodes;
    for (int i = 0; i < B; ++i) {
      auto d_fake = m.build_discriminator(dfrozen, wav_nodes[i]);
      auto d_real = m.build_discriminator(dfrozen, real_nodes[i]);
      adv_nodes.push_back(model::adversarial_g_loss(tg, d_fake));
      fm_nodes.push_back(model::feature_matching_loss(tg, d_real, d_fake));
    }
    int adv = mean_of(tg, adv_nodes);
    int fm = mean_of(tg, fm_nodes);

    int total = tg.add(tg.add(tg.scale(recon, cfg.mel_weight), kl),
                       tg.add(adv, tg.scale(fm, cfg.fm_weight)));

    const float l_total = tg.scalar_value(total);
    const float l_recon = tg.scalar_value(recon);
    const float l_kl = tg.scalar_value(kl);
    const float l_adv = tg.scalar_value(adv);
    const float l_fm = tg.scalar_value(fm);
    const float l_disc = td.scalar_value(dloss);
    const float l_logdet = tg.scalar_value(logdet_mean);

    tg.backward(total);
    gen_binder.accumulate_grads();
    adam_g.step();

    char row[256];
    std::snprintf(row, sizeof(row), "%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  (long long)step, l_total, l_recon, l_kl, l_adv, l_fm, l_disc, l_logdet);
    metrics << row;
    metrics.flush();

    if (progress && (step == 1 || step % 50 == 0))
      (*progress) << "step " << step << "  L_total=" << l_total << "  L_recon=" << l_recon
                  << "  L_kl=" << l_kl << "  L_disc=" << l_disc << std::endl;

    if (step % cfg.checkpoint_interval == 0 || step == cfg.total_steps) save_ckpt(step);
  }

  return {cfg.total_steps, last_checkpoint, metrics_path};
}

}  // namespace svc::pipeline
