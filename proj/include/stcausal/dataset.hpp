#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stcausal/errors.hpp"

namespace stc {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const LatLon&, const LatLon&) = default;
};

struct BoundingBox {
  std::array<LatLon, 4> corners{};
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct EventMention {
  std::string id;
  std::string trigger;
  std::map<std::string, std::string> arguments;
  friend bool operator==(const EventMention&, const EventMention&) = default;
};

struct CausalPair {
  std::string cause;
  std::string effect;
  friend bool operator==(const CausalPair&, const CausalPair&) = default;
};

struct CausalAnnotation {
  bool relation = false;
  std::vector<CausalPair> pairs;
  friend bool operator==(const CausalAnnotation&, const CausalAnnotation&) = default;
};

struct TweetRecord {
  std::string tweet_id;
  std::string tweet_text;
  std::vector<std::string> tokens;
  std::vector<std::string> mask;  // one tag per token: O, I-C, I-E
  std::vector<EventMention> events;
  CausalAnnotation causal;
  std::string date_str;
  int64_t date_numeric = 0;  // Unix seconds, UTC
  std::optional<std::string> geolocation;
  std::optional<BoundingBox> bounding_box;
  std::optional<int> location_mentions;
  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

// "(lat1,lon1),(lat2,lon2),(lat3,lon3),(lat4,lon4)", exactly four corners,
// lat in [-90,90], lon in [-180,180]. Corner order is preserved.
BoundingBox parse_bounding_box(const std::string& text);
std::string format_bounding_box(const BoundingBox& box);
LatLon bbox_centroid(const BoundingBox& box);

TweetRecord parse_tweet(const std::string& json_line);
std::string serialize_tweet(const TweetRecord& rec);

struct ValidationReport {
  size_t records = 0;  // records that parsed and validated
  size_t failed = 0;
  std::vector<std::string> errors;
};

std::string format_report(const ValidationReport& report);

// With report == nullptr the first bad line throws ValidationError; otherwise
// bad lines are collected in the report and skipped.
std::vector<TweetRecord> load_dataset(const std::string& path, ValidationReport* report = nullptr);
void write_dataset(const std::string& path, const std::vector<TweetRecord>& records);

void sort_chronologically(std::vector<TweetRecord>& records);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<TweetRecord> train;
  std::vector<TweetRecord> validation;
  std::vector<TweetRecord> test;
};

// Seeded shuffle, then each partition is re-sorted chronologically.
DatasetSplit split_dataset(const std::vector<TweetRecord>& records, const SplitRatios& ratios,
                           uint64_t seed);

}  // namespace stc
