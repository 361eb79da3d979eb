#include "stcausal/features.hpp"

#include <cmath>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "stcausal/linalg.hpp"

namespace stc {

using nlohmann::json;

std::vector<double> combine_trigger_cls(const std::vector<double>& v_trigger,
                                        const std::vector<double>& v_cls, double alpha) {
  if (v_trigger.size() != v_cls.size())
    throw ValidationError("combine: trigger dim " + std::to_string(v_trigger.size()) +
                          " != cls dim " + std::to_string(v_cls.size()));
  std::vector<double> out(v_trigger.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = alpha * v_trigger[i] + (1.0 - alpha) * v_cls[i];
  return out;
}

std::array<double, kTemporalDim> encode_temporal(int64_t unix_seconds) {
  time_t t = static_cast<time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  int weekday = (tm.tm_wday + 6) % 7;  // tm_wday has Sunday=0, we want Monday=0
  return {tm.tm_hour / 24.0, weekday / 7.0, (tm.tm_mon + 1) / 12.0, tm.tm_mday / 31.0};
}

std::array<double, kSpatialDim> encode_spatial(const TweetRecord& rec, int location_cap,
                                               double reserved_slot) {
  std::array<double, kSpatialDim> out{};
  out[0] = rec.bounding_box ? 1.0 : 0.0;
  out[1] = rec.geolocation ? 1.0 : 0.0;
  int mentions = rec.location_mentions.value_or(0);
  out[2] = location_cap > 0 ? std::min(mentions, location_cap) / static_cast<double>(location_cap)
                            : 0.0;
  out[3] = reserved_slot;
  if (rec.bounding_box) {
    LatLon c = bbox_centroid(*rec.bounding_box);
    out[4] = c.lat / 90.0;
    out[5] = c.lon / 180.0;
  }
  return out;
}

std::vector<double> fuse_features(const std::vector<double>& semantic,
                                  const std::array<double, kTemporalDim>& temporal,
                                  const std::array<double, kSpatialDim>& spatial) {
  std::vector<double> out;
  out.reserve(semantic.size() + kTemporalDim + kSpatialDim);
  out.insert(out.end(), semantic.begin(), semantic.end());
  out.insert(out.end(), temporal.begin(), temporal.end());
  out.insert(out.end(), spatial.begin(), spatial.end());
  return out;
}

std::span<const double> semantic_segment(const std::vector<double>& fused, int semantic_dim) {
  return {fused.data(), static_cast<size_t>(semantic_dim)};
}

std::span<const double> temporal_segment(const std::vector<double>& fused, int semantic_dim) {
  return {fused.data() + semantic_dim, static_cast<size_t>(kTemporalDim)};
}

std::span<const double> spatial_segment(const std::vector<double>& fused, int semantic_dim) {
  return {fused.data() + semantic_dim + kTemporalDim, static_cast<size_t>(kSpatialDim)};
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t fnv1a(const char* data, size_t n) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<double> hash_embed(const std::string& text, int dim, uint64_t seed,
                               uint64_t role_tag) {
  if (dim <= 0) throw ConfigError("hash_embed: dimension must be positive");
  std::vector<double> v(dim, 0.0);
  std::string padded = "^" + text + "$";
  uint64_t salt = splitmix64(seed ^ (role_tag * 0x9e3779b97f4a7c15ULL));
  size_t gram = 3;
  size_t count = padded.size() >= gram ? padded.size() - gram + 1 : 1;
  size_t width = padded.size() >= gram ? gram : padded.size();
  for (size_t i = 0; i < count; ++i) {
    uint64_t z = splitmix64(fnv1a(padded.data() + i, width) ^ salt);
    int idx = static_cast<int>(z % static_cast<uint64_t>(dim));
    v[idx] += (z >> 63) ? 1.0 : -1.0;
  }
  double norm = l2_norm(v);
  if (norm < 1e-12) {
    v.assign(dim, 0.0);
    v[salt % dim] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

std::string event_key(const std::string& tweet_id, const std::string& event_id) {
  return tweet_id + '\x1f' + event_id;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embeddings file: " + path);
  EmbeddingTable table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::string where = "embeddings line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": " + e.what());
    }
    auto read_vec = [&](const char* name) {
      auto it = j.find(name);
      if (it == j.end() || !it->is_array())
        throw ValidationError(where + ": " + name + " must be an array");
      std::vector<double> out;
      out.reserve(it->size());
      for (const auto& x : *it) {
        if (!x.is_number()) throw ValidationError(where + ": " + name + " must be numeric");
        out.push_back(x.get<double>());
      }
      return out;
    };
    if (!j.contains("tweet_id") || !j["tweet_id"].is_string() || !j.contains("event_id") ||
        !j["event_id"].is_string())
      throw ValidationError(where + ": tweet_id and event_id are required strings");
    table.insert(j["tweet_id"].get<std::string>(), j["event_id"].get<std::string>(),
                 read_vec("v_trigger"), read_vec("v_cls"));
  }
  return table;
}

void EmbeddingTable::insert(const std::string& tweet_id, const std::string& event_id,
                            std::vector<double> v_trigger, std::vector<double> v_cls) {
  if (v_trigger.size() != v_cls.size())
    throw ValidationError("embeddings: v_trigger and v_cls dims differ for " + tweet_id + "/" +
                          event_id);
  if (dim_ == 0) dim_ = static_cast<int>(v_trigger.size());
  if (static_cast<int>(v_trigger.size()) != dim_)
    throw ValidationError("embeddings: inconsistent dimension for " + tweet_id + "/" + event_id);
  auto key = event_key(tweet_id, event_id);
  if (!rows_.emplace(std::move(key), std::make_pair(std::move(v_trigger), std::move(v_cls)))
           .second)
    throw ValidationError("embeddings: duplicate entry for " + tweet_id + "/" + event_id);
}

std::pair<std::vector<double>, std::vector<double>> EmbeddingTable::lookup(
    const TweetRecord& rec, const EventMention& event) const {
  auto it = rows_.find(event_key(rec.tweet_id, event.id));
  if (it == rows_.end())
    throw ValidationError("embeddings: no entry for tweet " + rec.tweet_id + " event " + event.id);
  return it->second;
}

std::pair<std::vector<double>, std::vector<double>> HashEmbedder::lookup(
    const TweetRecord& rec, const EventMention& event) const {
  return {hash_embed(event.trigger, dim_, seed_, 1), hash_embed(rec.tweet_text, dim_, seed_, 2)};
}

FeatureTable build_features(const std::vector<TweetRecord>& records,
                            const EmbeddingSource& source, const FeatureConfig& config) {
  FeatureTable table;
  table.semantic_dim = source.dim();
  for (const auto& rec : records) {
    auto temporal = encode_temporal(rec.date_numeric);
    auto spatial = encode_spatial(rec, config.location_cap);
    for (const auto& event : rec.events) {
      auto [v_trigger, v_cls] = source.lookup(rec, event);
      auto semantic = combine_trigger_cls(v_trigger, v_cls, config.alpha);
      if (static_cast<int>(semantic.size()) != table.semantic_dim)
        throw ValidationError("features: embedding dim mismatch for tweet " + rec.tweet_id);
      table.by_event[event_key(rec.tweet_id, event.id)] =
          fuse_features(semantic, temporal, spatial);
    }
  }
  return table;
}

}  // namespace stc
