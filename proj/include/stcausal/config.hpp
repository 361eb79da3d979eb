#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stcausal/dataset.hpp"
#include "stcausal/graph.hpp"
#include "stcausal/model.hpp"
#include "stcausal/synth.hpp"

namespace stc {

struct EmbeddingConfig {
  std::string source = "hash";  // "hash" or "file"
  std::string path;
  int dim = 64;
  uint64_t hash_seed = 1234;
};

struct SynthOutputs {
  std::string dataset_out = "synth_dataset.jsonl";
  std::string embeddings_out = "synth_embeddings.jsonl";
};

struct RunConfig {
  uint64_t seed = 42;
  std::string dataset;
  EmbeddingConfig embeddings;
  double alpha = 0.7;
  int location_cap = 5;
  SplitRatios split;
  GraphConfig window;
  ModelConfig model;  // input_dim stays 0 here; the pipeline fills it in
  std::string knockout = "none";
  SynthConfig synth;
  SynthOutputs synth_outputs;
  std::string output_dir = "runs";

  void validate() const;  // throws ConfigError
};

// Strict parse: unknown keys anywhere are rejected.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// "section.key=value" (or "key=value" at top level), same strictness as the file.
void apply_override(RunConfig& config, const std::string& assignment);

std::string resolved_config_json(const RunConfig& config);
uint64_t config_hash(const RunConfig& config);

}  // namespace stc
