#include "stcausal/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "stcausal/linalg.hpp"

namespace stc {

using ordered_json = nlohmann::ordered_json;

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Event: return "event";
    case NodeKind::Spatial: return "spatial";
    case NodeKind::Temporal: return "temporal";
  }
  return "?";
}

const char* to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Contextual: return "contextual";
    case EdgeKind::Spatial: return "spatial";
    case EdgeKind::Temporal: return "temporal";
  }
  return "?";
}

double haversine_km(const LatLon& a, const LatLon& b) {
  constexpr double kEarthRadiusKm = 6371.0088;
  constexpr double kDeg = M_PI / 180.0;
  double dlat = (b.lat - a.lat) * kDeg;
  double dlon = (b.lon - a.lon) * kDeg;
  double s = std::sin(dlat / 2.0), t = std::sin(dlon / 2.0);
  double h = s * s + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<WindowBucket> partition_windows(const std::vector<TweetRecord>& records,
                                            int64_t window_seconds) {
  if (window_seconds <= 0) throw ConfigError("window: window_seconds must be positive");
  std::vector<WindowBucket> buckets;
  if (records.empty()) return buckets;
  int64_t t0 = records.front().date_numeric;
  int64_t prev = t0;
  for (size_t i = 0; i < records.size(); ++i) {
    int64_t t = records[i].date_numeric;
    if (t < prev)
      throw ValidationError("partition_windows: records not chronologically sorted at index " +
                            std::to_string(i));
    prev = t;
    int64_t k = (t - t0) / window_seconds;
    if (buckets.empty() || buckets.back().window_index != k) {
      WindowBucket b;
      b.window_index = k;
      b.start = t0 + k * window_seconds;
      b.end = b.start + window_seconds;
      buckets.push_back(std::move(b));
    }
    buckets.back().records.push_back(i);
  }
  return buckets;
}

namespace {

std::string format_coord(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// Location signal identity: the geolocation text when present, else the
// bounding-box centroid.
std::string location_key(const TweetRecord& rec) {
  if (rec.geolocation) return "g:" + *rec.geolocation;
  if (rec.bounding_box) {
    LatLon c = bbox_centroid(*rec.bounding_box);
    return "c:" + format_coord(c.lat) + "," + format_coord(c.lon);
  }
  return {};
}

}  // namespace

void generate_candidate_pairs(WindowGraph& g,
                              const std::map<std::string, std::vector<CausalPair>>& annotations,
                              bool cross_tweet) {
  g.pairs.clear();
  // event node ids per tweet, in node order
  std::vector<std::pair<std::string, std::vector<int>>> tweets;
  for (const auto& node : g.nodes) {
    if (node.kind != NodeKind::Event) continue;
    if (tweets.empty() || tweets.back().first != node.tweet_id)
      tweets.push_back({node.tweet_id, {}});
    tweets.back().second.push_back(node.id);
  }
  for (const auto& [tweet_id, node_ids] : tweets) {
    std::vector<std::pair<std::string, std::string>> labeled;
    if (auto it = annotations.find(tweet_id); it != annotations.end()) {
      for (const auto& p : it->second) {
        bool cause_ok = false, effect_ok = false;
        for (int id : node_ids) {
          if (g.nodes[id].event_id == p.cause) cause_ok = true;
          if (g.nodes[id].event_id == p.effect) effect_ok = true;
        }
        if (!cause_ok || !effect_ok)
          throw ValidationError("candidate pairs: annotation for tweet " + tweet_id +
                                " names an event with no node (" + p.cause + " -> " + p.effect +
                                ")");
        labeled.emplace_back(p.cause, p.effect);
      }
    }
    for (int a : node_ids) {
      for (int b : node_ids) {
        if (a == b) continue;
        CandidatePair cp;
        cp.a = a;
        cp.b = b;
        const std::string& ea = g.nodes[a].event_id;
        const std::string& eb = g.nodes[b].event_id;
        cp.label = std::find(labeled.begin(), labeled.end(), std::make_pair(ea, eb)) !=
                           labeled.end()
                       ? 1
                       : 0;
        g.pairs.push_back(cp);
      }
    }
  }
  if (cross_tweet) {
    std::vector<int> events;
    for (const auto& node : g.nodes)
      if (node.kind == NodeKind::Event) events.push_back(node.id);
    for (int a : events)
      for (int b : events) {
        if (a == b || g.nodes[a].tweet_id == g.nodes[b].tweet_id) continue;
        g.pairs.push_back({a, b, 0});
      }
  }
}

WindowGraph build_window_graph(const std::vector<TweetRecord>& records,
                               const WindowBucket& bucket, const FeatureTable& features,
                               const GraphConfig& config) {
  WindowGraph g;
  g.window_index = bucket.window_index;
  g.start = bucket.start;
  g.end = bucket.end;
  const int dim = features.dim();
  const int semantic_dim = features.semantic_dim;

  struct EventRef {
    int node = 0;
    size_t record = 0;
  };
  std::vector<EventRef> events;
  for (size_t idx : bucket.records) {
    const TweetRecord& rec = records[idx];
    for (const auto& event : rec.events) {
      auto it = features.by_event.find(event_key(rec.tweet_id, event.id));
      if (it == features.by_event.end())
        throw ValidationError("graph: no features for tweet " + rec.tweet_id + " event " +
                              event.id);
      Node node;
      node.id = static_cast<int>(g.nodes.size());
      node.kind = NodeKind::Event;
      node.tweet_id = rec.tweet_id;
      node.event_id = event.id;
      node.timestamp = rec.date_numeric;
      node.features = it->second;
      events.push_back({node.id, idx});
      g.nodes.push_back(std::move(node));
    }
  }

  // attribute nodes: one per distinct location signal / distinct timestamp
  std::vector<std::pair<std::string, int>> spatial_ids;  // key -> node id, first-seen order
  std::vector<std::pair<int64_t, int>> temporal_ids;
  auto spatial_node = [&](const std::string& key) {
    for (auto& [k, id] : spatial_ids)
      if (k == key) return id;
    Node node;
    node.id = static_cast<int>(g.nodes.size());
    node.kind = NodeKind::Spatial;
    node.features.assign(dim, 0.0);
    node.features[semantic_dim + kTemporalDim] = 1.0;
    spatial_ids.emplace_back(key, node.id);
    g.nodes.push_back(std::move(node));
    return spatial_ids.back().second;
  };
  auto temporal_node = [&](int64_t ts) {
    for (auto& [t, id] : temporal_ids)
      if (t == ts) return id;
    Node node;
    node.id = static_cast<int>(g.nodes.size());
    node.kind = NodeKind::Temporal;
    node.timestamp = ts;
    node.features.assign(dim, 0.0);
    node.features[semantic_dim] = 1.0;
    temporal_ids.emplace_back(ts, node.id);
    g.nodes.push_back(std::move(node));
    return temporal_ids.back().second;
  };

  for (const auto& ev : events) {
    const TweetRecord& rec = records[ev.record];
    std::string key = location_key(rec);
    if (!key.empty()) g.edges.push_back({ev.node, spatial_node(key), EdgeKind::Spatial});
    g.edges.push_back({ev.node, temporal_node(rec.date_numeric), EdgeKind::Temporal});
  }

  // intra-tweet contextual edges
  for (size_t i = 0; i < events.size(); ++i) {
    for (size_t j = i + 1; j < events.size(); ++j) {
      if (events[i].record != events[j].record) continue;
      g.edges.push_back({events[i].node, events[j].node, EdgeKind::Contextual});
    }
  }

  // cross-tweet contextual edges on semantic similarity
  for (size_t i = 0; i < events.size(); ++i) {
    const double* fi = g.nodes[events[i].node].features.data();
    for (size_t j = i + 1; j < events.size(); ++j) {
      if (events[i].record == events[j].record) continue;
      const double* fj = g.nodes[events[j].node].features.data();
      if (cosine_similarity(fi, fj, semantic_dim) >= config.semantic_threshold)
        g.edges.push_back({events[i].node, events[j].node, EdgeKind::Contextual});
    }
  }

  // cross-tweet spatial edges: centroid distance, or exact geolocation match
  // when coordinates are absent on both sides
  for (size_t i = 0; i < events.size(); ++i) {
    const TweetRecord& ri = records[events[i].record];
    for (size_t j = i + 1; j < events.size(); ++j) {
      if (events[i].record == events[j].record) continue;
      const TweetRecord& rj = records[events[j].record];
      bool linked = false;
      if (ri.bounding_box && rj.bounding_box) {
        linked = haversine_km(bbox_centroid(*ri.bounding_box), bbox_centroid(*rj.bounding_box)) <=
                 config.spatial_km;
      } else if (!ri.bounding_box && !rj.bounding_box && ri.geolocation && rj.geolocation) {
        linked = *ri.geolocation == *rj.geolocation;
      }
      if (linked) g.edges.push_back({events[i].node, events[j].node, EdgeKind::Spatial});
    }
  }

  // temporal edges: each event to its k nearest strictly-later events
  std::vector<int> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    int64_t ta = g.nodes[events[a].node].timestamp, tb = g.nodes[events[b].node].timestamp;
    if (ta != tb) return ta < tb;
    return events[a].node < events[b].node;
  });
  for (size_t i = 0; i < order.size(); ++i) {
    int64_t ti = g.nodes[events[order[i]].node].timestamp;
    int taken = 0;
    for (size_t j = i + 1; j < order.size() && taken < config.temporal_neighbors; ++j) {
      if (g.nodes[events[order[j]].node].timestamp <= ti) continue;
      g.edges.push_back({events[order[i]].node, events[order[j]].node, EdgeKind::Temporal});
      ++taken;
    }
  }

  std::map<std::string, std::vector<CausalPair>> annotations;
  for (size_t idx : bucket.records) {
    const TweetRecord& rec = records[idx];
    if (!rec.causal.pairs.empty()) annotations[rec.tweet_id] = rec.causal.pairs;
  }
  generate_candidate_pairs(g, annotations, config.cross_tweet_pairs);
  return g;
}

std::vector<WindowGraph> build_graphs(const std::vector<TweetRecord>& records,
                                      const std::vector<WindowBucket>& buckets,
                                      const FeatureTable& features, const GraphConfig& config,
                                      bool serial_reference) {
  std::vector<WindowGraph> graphs(buckets.size());
  if (serial_reference) {
    for (size_t i = 0; i < buckets.size(); ++i)
      graphs[i] = build_window_graph(records, buckets[i], features, config);
    return graphs;
  }
  std::vector<std::exception_ptr> errors(buckets.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < buckets.size(); ++i) {
    try {
      graphs[i] = build_window_graph(records, buckets[i], features, config);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return graphs;
}

GraphStats graph_stats(const WindowGraph& g) {
  GraphStats s;
  for (const auto& node : g.nodes) {
    switch (node.kind) {
      case NodeKind::Event: ++s.event_nodes; break;
      case NodeKind::Spatial: ++s.spatial_nodes; break;
      case NodeKind::Temporal: ++s.temporal_nodes; break;
    }
  }
  for (const auto& e : g.edges) {
    switch (e.kind) {
      case EdgeKind::Contextual: ++s.contextual_edges; break;
      case EdgeKind::Spatial: ++s.spatial_edges; break;
      case EdgeKind::Temporal: ++s.temporal_edges; break;
    }
  }
  for (const auto& p : g.pairs) (p.label ? s.positive_pairs : s.negative_pairs)++;
  return s;
}

GraphStats total_stats(const std::vector<WindowGraph>& graphs) {
  GraphStats t;
  for (const auto& g : graphs) {
    GraphStats s = graph_stats(g);
    t.event_nodes += s.event_nodes;
    t.spatial_nodes += s.spatial_nodes;
    t.temporal_nodes += s.temporal_nodes;
    t.contextual_edges += s.contextual_edges;
    t.spatial_edges += s.spatial_edges;
    t.temporal_edges += s.temporal_edges;
    t.positive_pairs += s.positive_pairs;
    t.negative_pairs += s.negative_pairs;
  }
  return t;
}

void write_graphs(const std::string& path, const std::vector<WindowGraph>& graphs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& g : graphs) {
    ordered_json j;
    j["window_index"] = g.window_index;
    j["start"] = g.start;
    j["end"] = g.end;
    ordered_json nodes = ordered_json::array();
    for (const auto& n : g.nodes) {
      ordered_json jn;
      jn["id"] = n.id;
      jn["kind"] = to_string(n.kind);
      if (!n.tweet_id.empty()) jn["tweet_id"] = n.tweet_id;
      if (!n.event_id.empty()) jn["event_id"] = n.event_id;
      jn["timestamp"] = n.timestamp;
      jn["features"] = n.features;
      nodes.push_back(std::move(jn));
    }
    j["nodes"] = std::move(nodes);
    ordered_json edges = ordered_json::array();
    for (const auto& e : g.edges)
      edges.push_back({{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}});
    j["edges"] = std::move(edges);
    ordered_json pairs = ordered_json::array();
    for (const auto& p : g.pairs)
      pairs.push_back({{"a", p.a}, {"b", p.b}, {"label", p.label}});
    j["pairs"] = std::move(pairs);
    out << j.dump() << "\n";
  }
}

}  // namespace stc
