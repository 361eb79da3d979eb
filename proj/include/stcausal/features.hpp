#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stcausal/dataset.hpp"

namespace stc {

inline constexpr int kTemporalDim = 4;
inline constexpr int kSpatialDim = 6;

// alpha * v_trigger + (1 - alpha) * v_cls
std::vector<double> combine_trigger_cls(const std::vector<double>& v_trigger,
                                        const std::vector<double>& v_cls, double alpha);

// [hour/24, weekday/7 (Monday=0), month/12, day/31], all from UTC
std::array<double, kTemporalDim> encode_temporal(int64_t unix_seconds);

// [g1, g2, l1, l2, lat/90, lon/180]; g1 = bounding box present, g2 = geolocation
// text present, l1 = min(location_mentions, cap)/cap, l2 reserved (the caller may
// supply a value; nothing in the pipeline does). Coordinates come from the
// bounding-box centroid and are 0 when the box is absent.
std::array<double, kSpatialDim> encode_spatial(const TweetRecord& rec, int location_cap = 5,
                                               double reserved_slot = 0.0);

std::vector<double> fuse_features(const std::vector<double>& semantic,
                                  const std::array<double, kTemporalDim>& temporal,
                                  const std::array<double, kSpatialDim>& spatial);

std::span<const double> semantic_segment(const std::vector<double>& fused, int semantic_dim);
std::span<const double> temporal_segment(const std::vector<double>& fused, int semantic_dim);
std::span<const double> spatial_segment(const std::vector<double>& fused, int semantic_dim);

// Deterministic character n-gram feature hashing, L2-normalized. role_tag
// separates vector families drawn from the same text (trigger vs context).
std::vector<double> hash_embed(const std::string& text, int dim, uint64_t seed,
                               uint64_t role_tag = 0);

class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;
  virtual int dim() const = 0;
  // (v_trigger, v_cls) for one event mention
  virtual std::pair<std::vector<double>, std::vector<double>> lookup(
      const TweetRecord& rec, const EventMention& event) const = 0;
};

// Backed by a JSONL file of {tweet_id, event_id, v_trigger, v_cls}.
class EmbeddingTable : public EmbeddingSource {
 public:
  static EmbeddingTable load(const std::string& path);
  int dim() const override { return dim_; }
  std::pair<std::vector<double>, std::vector<double>> lookup(
      const TweetRecord& rec, const EventMention& event) const override;
  void insert(const std::string& tweet_id, const std::string& event_id,
              std::vector<double> v_trigger, std::vector<double> v_cls);
  size_t size() const { return rows_.size(); }

 private:
  int dim_ = 0;
  std::unordered_map<std::string, std::pair<std::vector<double>, std::vector<double>>> rows_;
};

class HashEmbedder : public EmbeddingSource {
 public:
  HashEmbedder(int dim, uint64_t seed) : dim_(dim), seed_(seed) {}
  int dim() const override { return dim_; }
  std::pair<std::vector<double>, std::vector<double>> lookup(
      const TweetRecord& rec, const EventMention& event) const override;

 private:
  int dim_ = 0;
  uint64_t seed_ = 0;
};

std::string event_key(const std::string& tweet_id, const std::string& event_id);

struct FeatureConfig {
  double alpha = 0.7;
  int location_cap = 5;
};

// Fused node features for every event mention in the corpus, keyed by
// event_key(tweet_id, event_id).
struct FeatureTable {
  int semantic_dim = 0;
  std::unordered_map<std::string, std::vector<double>> by_event;
  int dim() const { return semantic_dim + kTemporalDim + kSpatialDim; }
};

FeatureTable build_features(const std::vector<TweetRecord>& records,
                            const EmbeddingSource& source, const FeatureConfig& config);

}  // namespace stc
