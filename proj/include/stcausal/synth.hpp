#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stcausal/dataset.hpp"
#include "stcausal/features.hpp"
#include "stcausal/graph.hpp"

namespace stc {

struct SynthConfig {
  int tweets = 1000;
  int events_min = 2;
  int events_max = 2;
  double p_causal = 0.5;    // per-tweet chance of one planted cause->effect pair
  double sigma_s = 0.9;     // spatial signal strength in [0,1]
  double sigma_t = 0.9;     // temporal signal strength in [0,1]
  double semantic_strength = 0.9;
  double semantic_noise = 0.55;
  int dim = 64;             // embedding dimension
  int64_t span_start = 1503705600;  // 2017-08-26 00:00:00 UTC
  int64_t span_end = 1504137599;    // 2017-08-30 23:59:59 UTC
  double p_geo = 0.9;       // chance a tweet carries a bounding box
  int locations = 9;
  int hot_locations = 3;
  LatLon region_min{20.0, -115.0};
  LatLon region_max{45.0, -75.0};
  uint64_t seed = 7;

  void validate() const;  // throws ConfigError
};

struct EmbeddingRow {
  std::string tweet_id;
  std::string event_id;
  std::vector<double> v_trigger;
  std::vector<double> v_cls;
};

struct SynthCorpus {
  std::vector<TweetRecord> records;  // chronological
  std::vector<EmbeddingRow> embeddings;
};

SynthCorpus generate_corpus(const SynthConfig& config);

void write_embeddings(const std::string& path, const std::vector<EmbeddingRow>& rows);

enum class Knockout { None, NoSpatial, NoTemporal, NoBoth };

Knockout knockout_from_string(const std::string& name);  // throws ConfigError
const char* to_string(Knockout mode);

void apply_knockout(std::vector<double>& features, int semantic_dim, Knockout mode);
void apply_knockout(FeatureTable& table, Knockout mode);
void apply_knockout(WindowGraph& g, int semantic_dim, Knockout mode);

}  // namespace stc
