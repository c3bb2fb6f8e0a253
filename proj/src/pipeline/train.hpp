#pragma once

#include <ostream>
#include <string>

#include "pipeline/config.hpp"
#include "pipeline/dataset.hpp"

namespace svc::pipeline {

struct TrainResult {
  int64_t steps = 0;
  std::string final_checkpoint;
  std::string metrics_path;
};

// Full training run: per step, one discriminator update then one generator
// update on a batch of seeded random fixed-length segments. Appends one CSV
// row per step to <out_dir>/metrics.csv:
//   step,L_total,L_recon,L_kl,L_adv_G,L_fm,L_disc,logdet
// Checkpoints land in out_dir every checkpoint_interval steps (plus step 0
// and the final step); a non-finite loss aborts with NumericalError, leaving
// the last written checkpoint in place.
TrainResult train(const PipelineConfig& cfg, const std::string& dataset_dir,
                  const std::string& out_dir, std::ostream* progress = nullptr);

}  // namespace svc::pipeline
