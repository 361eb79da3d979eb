#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stcausal/dataset.hpp"
#include "stcausal/features.hpp"

namespace stc {

enum class NodeKind { Event, Spatial, Temporal };
enum class EdgeKind { Contextual, Spatial, Temporal };

const char* to_string(NodeKind kind);
const char* to_string(EdgeKind kind);

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::Event;
  std::string tweet_id;  // empty for attribute nodes
  std::string event_id;  // event nodes only
  int64_t timestamp = 0;
  std::vector<double> features;
};

struct Edge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::Contextual;
};

struct CandidatePair {
  int a = 0;  // node ids, ordered: a candidate cause, b candidate effect
  int b = 0;
  int label = 0;
};

struct WindowGraph {
  int64_t window_index = 0;
  int64_t start = 0;
  int64_t end = 0;  // half-open [start, end)
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<CandidatePair> pairs;
};

struct WindowBucket {
  int64_t window_index = 0;
  int64_t start = 0;
  int64_t end = 0;
  std::vector<size_t> records;  // indexes into the record vector, chronological
};

struct GraphConfig {
  int64_t window_seconds = 21600;
  double spatial_km = 50.0;
  double semantic_threshold = 0.85;
  int temporal_neighbors = 5;
  bool cross_tweet_pairs = false;
};

// Half-open buckets anchored at the first timestamp; empty buckets dropped.
// Records must be chronologically sorted.
std::vector<WindowBucket> partition_windows(const std::vector<TweetRecord>& records,
                                            int64_t window_seconds);

WindowGraph build_window_graph(const std::vector<TweetRecord>& records,
                               const WindowBucket& bucket, const FeatureTable& features,
                               const GraphConfig& config);

// Ordered intra-tweet event pairs with labels from the annotations; fills
// g.pairs. Cross-tweet pairs (always label 0) only when the config flag is on.
void generate_candidate_pairs(WindowGraph& g,
                              const std::map<std::string, std::vector<CausalPair>>& annotations,
                              bool cross_tweet);

// One graph per bucket. Buckets are independent, so construction runs in
// parallel when OpenMP is enabled and serial_reference is false.
std::vector<WindowGraph> build_graphs(const std::vector<TweetRecord>& records,
                                      const std::vector<WindowBucket>& buckets,
                                      const FeatureTable& features, const GraphConfig& config,
                                      bool serial_reference = false);

struct GraphStats {
  int64_t event_nodes = 0;
  int64_t spatial_nodes = 0;
  int64_t temporal_nodes = 0;
  int64_t contextual_edges = 0;
  int64_t spatial_edges = 0;
  int64_t temporal_edges = 0;
  int64_t positive_pairs = 0;
  int64_t negative_pairs = 0;
};

GraphStats graph_stats(const WindowGraph& g);
GraphStats total_stats(const std::vector<WindowGraph>& graphs);

void write_graphs(const std::string& path, const std::vector<WindowGraph>& graphs);

double haversine_km(const LatLon& a, const LatLon& b);

}  // namespace stc
