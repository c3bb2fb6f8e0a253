#include <CLI11.hpp>
#include <iostream>

#include "common/error.hpp"
#include "nn/gradcheck.hpp"
#include "pipeline/benchmark.hpp"
#include "pipeline/config.hpp"
#include "pipeline/convert.hpp"
#include "pipeline/dataset.hpp"
#include "pipeline/export.hpp"
#include "pipeline/toy_data.hpp"
#include "pipeline/train.hpp"

using namespace svc;

int main(int argc, char** argv) {
  CLI::App app{"singing voice conversion: flow-based synthesis, training and benchmarks"};
  app.require_subcommand(1);

  std::string config_path, dir, ckpt, out, source, target;
  double seconds = 10.0;
  std::string decoder = "both";
  int runs = 5;
  uint64_t seed = 0;
  pipeline::ToyDataSpec toy;

  auto* extract = app.add_subcommand("extract-features", "extract and cache features for a wav directory");
  extract->add_option("config", config_path)->required();
  extract->add_option("wav-dir", dir)->required();

  auto* train_cmd = app.add_subcommand("train", "train from a dataset directory");
  train_cmd->add_option("config", config_path)->required();
  train_cmd->add_option("dataset-dir", dir)->required();
  train_cmd->add_option("--out", out, "checkpoint/metrics directory")->required();

  auto* convert_cmd = app.add_subcommand("convert", "convert a source utterance to a target voice");
  convert_cmd->add_option("config", config_path)->required();
  convert_cmd->add_option("checkpoint", ckpt)->required();
  convert_cmd->add_option("--source", source)->required();
  convert_cmd->add_option("--target", target)->required();
  convert_cmd->add_option("--out", out)->required();

  auto* bench = app.add_subcommand("benchmark-rtf", "real-time-factor benchmark");
  bench->add_option("config", config_path)->required();
  bench->add_option("checkpoint", ckpt)->required();
  bench->add_option("--seconds", seconds);
  bench->add_option("--decoder", decoder)->check(CLI::IsMember({"msistft", "baseline", "both"}));
  bench->add_option("--runs", runs);

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every op class");
  gc->add_option("config", config_path)->required();
  gc->add_option("--seed", seed);

  auto* exp = app.add_subcommand("export-embeddings", "speaker embeddings as CSV");
  exp->add_option("config", config_path)->required();
  exp->add_option("checkpoint", ckpt)->required();
  exp->add_option("wav-dir", dir)->required();
  exp->add_option("--out", out)->required();

  auto* toy_cmd = app.add_subcommand("make-toy-data", "generate the synthetic two-speaker dataset");
  toy_cmd->add_option("dir", dir)->required();
  toy_cmd->add_option("--speakers", toy.speakers);
  toy_cmd->add_option("--clips", toy.clips_per_speaker);
  toy_cmd->add_option("--seconds", toy.seconds);
  toy_cmd->add_option("--seed", toy.seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      auto cfg = pipeline::load_config(config_path);
      auto result = pipeline::extract_features(cfg, dir);
      std::cout << result.records.size() << " utterances (" << result.cache_hits
                << " cache hits, " << result.cache_misses << " recomputed)\n";
      for (const auto& f : result.failures)
        std::cerr << "failed: " << f.path << ": " << f.message << "\n";
      return result.failures.empty() ? 0 : 2;
    }
    if (*train_cmd) {
      auto cfg = pipeline::load_config(config_path);
      auto result = pipeline::train(cfg, dir, out, &std::cout);
      std::cout << "trained " << result.steps << " steps\n"
                << "final checkpoint: " << result.final_checkpoint << "\n"
                << "metrics: " << result.metrics_path << "\n";
      return 0;
    }
    if (*convert_cmd) {
      auto cfg = pipeline::load_config(config_path);
      auto result = pipeline::convert(cfg, ckpt, source, target, out);
      std::cout << "wrote " << out << " (" << result.audio.samples.size() << " samples, "
                << result.frames << " frames, checkpoint step " << result.checkpoint_step
                << (result.peak_normalized ? ", peak-normalized" : "") << ")\n";
      return 0;
    }
    if (*bench) {
      auto cfg = pipeline::load_config(config_path);
      auto report = pipeline::benchmark_rtf(cfg, ckpt, seconds,
                                            pipeline::decoder_choice_from_string(decoder),
                                            runs);
      std::cout << report.to_text();
      return 0;
    }
    if (*gc) {
      pipeline::load_config(config_path);  // validates the config surface
      auto report = nn::run_gradcheck(nn::default_gradcheck_cases(), seed);
      std::cout << report.to_text();
      return report.all_pass ? 0 : 3;
    }
    if (*exp) {
      auto cfg = pipeline::load_config(config_path);
      auto result = pipeline::export_embeddings(cfg, ckpt, dir, out);
      std::cout << result.rows << " rows written to " << out << "\n";
      return result.failures == 0 ? 0 : 2;
    }
    if (*toy_cmd) {
      pipeline::generate_toy_dataset(dir, toy);
      std::cout << "wrote " << toy.speakers * toy.clips_per_speaker << " clips to " << dir
                << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return error_kind_exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
