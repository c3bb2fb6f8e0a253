#pragma once

#include <string>

#include "pipeline/config.hpp"

namespace svc::pipeline {

struct ExportResult {
  int rows = 0;
  int failures = 0;
};

// One CSV row per utterance: id plus the 256 speaker-embedding values from
// the checkpointed embedder. Per-file failures are reported and skipped.
ExportResult export_embeddings(const PipelineConfig& cfg, const std::string& checkpoint,
                               const std::string& wav_dir, const std::string& out_csv);

}  // namespace svc::pipeline
