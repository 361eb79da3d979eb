#include "stcausal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>

#include "stcausal/errors.hpp"
#include "stcausal/linalg.hpp"

namespace stc {

using json = nlohmann::ordered_json;

void SynthConfig::validate() const {
  if (tweets <= 0) throw ConfigError("synth: tweets must be positive");
  if (events_min < 1) throw ConfigError("synth: events_min must be at least 1");
  if (events_max < events_min) throw ConfigError("synth: events_max < events_min");
  if (!(p_causal >= 0.0 && p_causal <= 1.0)) throw ConfigError("synth: p_causal must be in [0,1]");
  if (!(sigma_s >= 0.0 && sigma_s <= 1.0)) throw ConfigError("synth: sigma_s must be in [0,1]");
  if (!(sigma_t >= 0.0 && sigma_t <= 1.0)) throw ConfigError("synth: sigma_t must be in [0,1]");
  if (semantic_strength < 0.0) throw ConfigError("synth: semantic_strength must be non-negative");
  if (semantic_noise <= 0.0) throw ConfigError("synth: semantic_noise must be positive");
  if (dim < 8) throw ConfigError("synth: dim must be at least 8");
  if (span_end <= span_start) throw ConfigError("synth: span_end must exceed span_start");
  if (!(p_geo >= 0.0 && p_geo <= 1.0)) throw ConfigError("synth: p_geo must be in [0,1]");
  if (locations < 2) throw ConfigError("synth: locations must be at least 2");
  if (hot_locations < 1 || hot_locations >= locations)
    throw ConfigError("synth: hot_locations must be in [1, locations)");
  if (!(region_min.lat < region_max.lat && region_min.lon < region_max.lon))
    throw ConfigError("synth: region_min must be strictly below region_max");
  if (region_min.lat < -90.0 || region_max.lat > 90.0 || region_min.lon < -180.0 ||
      region_max.lon > 180.0)
    throw ConfigError("synth: region outside valid coordinates");
}

namespace {

const char* kCauseWords[] = {"flooding", "storm",  "surge",   "rainfall",
                             "levee",    "windfall", "downpour", "breach"};
const char* kEffectWords[] = {"evacuation", "rescue",  "damage",   "outage",
                              "closure",    "collapse", "stranding", "blackout"};
const char* kNeutralWords[] = {"shelter", "update", "report",   "photo",
                               "traffic", "donation", "briefing", "volunteers"};
const char* kCityNames[] = {"rockport", "refugio",  "portaransas", "houston", "katy",
                            "conroe",   "galveston", "beaumont",    "victoria",
                            "pasadena", "baytown",   "sugarland"};

std::vector<double> gaussian_vec(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> norm(0.0, 1.0);
  std::vector<double> v(dim);
  double inv = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& x : v) x = norm(rng) * inv;
  return v;
}

void normalize_or_unit(std::vector<double>& v) {
  double n = l2_norm(v);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  } else {
    v[0] = 1.0;
  }
}

// three orthonormal planted directions
std::vector<std::vector<double>> planted_directions(int dim, std::mt19937_64& rng) {
  std::vector<std::vector<double>> dirs;
  for (int k = 0; k < 3; ++k) {
    auto v = gaussian_vec(dim, rng);
    for (const auto& prev : dirs) {
      double proj = dot(v.data(), prev.data(), dim);
      axpy(-proj, prev.data(), v.data(), dim);
    }
    normalize_or_unit(v);
    dirs.push_back(std::move(v));
  }
  return dirs;
}

std::string utc_string(int64_t ts) {
  std::time_t t = static_cast<std::time_t>(ts);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // cities spread out so the distance-based graph edges stay local
  std::vector<LatLon> cities;
  {
    std::uniform_real_distribution<double> ulat(config.region_min.lat, config.region_max.lat);
    std::uniform_real_distribution<double> ulon(config.region_min.lon, config.region_max.lon);
    double min_sep = 60.0;
    int attempts = 0;
    while (static_cast<int>(cities.size()) < config.locations) {
      LatLon c{ulat(rng), ulon(rng)};
      bool ok = true;
      for (const auto& prev : cities)
        if (haversine_km(prev, c) < min_sep) ok = false;
      if (ok) {
        cities.push_back(c);
        attempts = 0;
      } else if (++attempts > 5000) {
        min_sep *= 0.8;
        attempts = 0;
      }
    }
  }
  auto city_name = [&](int idx) {
    constexpr int named = static_cast<int>(sizeof(kCityNames) / sizeof(kCityNames[0]));
    if (idx < named) return std::string(kCityNames[idx]);
    return "city" + std::to_string(idx);
  };

  auto dirs = planted_directions(config.dim, rng);
  const auto& u_shared = dirs[0];
  const auto& u_cause = dirs[1];
  const auto& u_effect = dirs[2];

  constexpr int n_cause = static_cast<int>(sizeof(kCauseWords) / sizeof(kCauseWords[0]));
  constexpr int n_effect = static_cast<int>(sizeof(kEffectWords) / sizeof(kEffectWords[0]));
  constexpr int n_neutral = static_cast<int>(sizeof(kNeutralWords) / sizeof(kNeutralWords[0]));
  std::uniform_int_distribution<int> pick_cause(0, n_cause - 1);
  std::uniform_int_distribution<int> pick_effect(0, n_effect - 1);
  std::uniform_int_distribution<int> pick_neutral(0, n_neutral - 1);
  std::uniform_int_distribution<int> pick_hot(0, config.hot_locations - 1);
  std::uniform_int_distribution<int> pick_cold(config.hot_locations, config.locations - 1);
  std::uniform_int_distribution<int> pick_events(config.events_min, config.events_max);
  int64_t days = (config.span_end - config.span_start) / 86400 + 1;
  std::uniform_int_distribution<int64_t> pick_day(0, days - 1);
  // hot hours are [06:00, 12:00); cold offsets cover the rest of the day
  std::uniform_int_distribution<int64_t> pick_hot_sec(6 * 3600, 12 * 3600 - 1);
  std::uniform_int_distribution<int64_t> pick_cold_sec(0, 18 * 3600 - 1);
  std::uniform_int_distribution<int> pick_mention_hi(0, 3);
  std::uniform_int_distribution<int> pick_mention_lo(0, 1);

  // base rate of the hot markers; sigma lifts the causal side above it, so
  // sigma 0 means the channel carries no signal at all
  constexpr double kHotBase = 0.05;
  auto hot_prob = [](double sigma) { return kHotBase + sigma * (1.0 - kHotBase); };
  // each causal tweet routes its existence evidence through one channel (or
  // all three), so no channel is redundant across the whole corpus
  std::uniform_int_distribution<int> pick_channel(0, 3);

  // every event carries a role direction; only causal tweets line them up as
  // cause then effect, and only they add the shared existence direction. A
  // quarter of the non-causal tweets show the same alignment by chance, so
  // the aligned pattern alone never settles existence.
  auto event_embedding = [&](bool causal, int event_idx, double shared_w) {
    auto v = gaussian_vec(config.dim, rng);
    for (double& x : v) x *= config.semantic_noise;
    const std::vector<double>* role;
    if (causal && event_idx == 0)
      role = &u_cause;
    else if (causal && event_idx == 1)
      role = &u_effect;
    else
      role = unit(rng) < 0.5 ? &u_cause : &u_effect;
    axpy(config.semantic_strength, role->data(), v.data(), config.dim);
    if (causal)
      axpy(shared_w * config.semantic_strength, u_shared.data(), v.data(), config.dim);
    normalize_or_unit(v);
    return v;
  };

  SynthCorpus corpus;
  corpus.records.reserve(config.tweets);
  for (int i = 0; i < config.tweets; ++i) {
    int n_events = pick_events(rng);
    bool causal = n_events >= 2 && unit(rng) < config.p_causal;
    int channel = causal ? pick_channel(rng) : -1;
    bool semantic_on = channel == 0 || channel == 3;
    bool spatial_on = channel == 1 || channel == 3;
    bool temporal_on = channel == 2 || channel == 3;
    double shared_w = causal && semantic_on ? 1.0 : 0.0;

    // one latent spatial state drives the city and the mention count
    bool hot_spatial = unit(rng) < hot_prob(spatial_on ? config.sigma_s : 0.0);
    int city_idx = hot_spatial ? pick_hot(rng) : pick_cold(rng);
    const LatLon& city = cities[city_idx];
    std::string city_str = city_name(city_idx);
    int mentions = hot_spatial ? 2 + pick_mention_hi(rng) : pick_mention_lo(rng);

    int64_t offset;
    if (unit(rng) < hot_prob(temporal_on ? config.sigma_t : 0.0)) {
      offset = pick_hot_sec(rng);
    } else {
      offset = pick_cold_sec(rng);
      if (offset >= 6 * 3600) offset += 6 * 3600;
    }
    int64_t ts = std::min(config.span_start + pick_day(rng) * 86400 + offset, config.span_end);

    bool has_geo = unit(rng) < config.p_geo;

    TweetRecord rec;
    rec.tweet_id = "synth" + std::to_string(100000 + i);
    rec.date_numeric = ts;
    rec.date_str = utc_string(ts);
    rec.location_mentions = mentions;
    if (has_geo) {
      rec.geolocation = city_str;
      BoundingBox box;
      double d = 0.15;
      box.corners[0] = {city.lat - d, city.lon - d};
      box.corners[1] = {city.lat - d, city.lon + d};
      box.corners[2] = {city.lat + d, city.lon + d};
      box.corners[3] = {city.lat + d, city.lon - d};
      rec.bounding_box = box;
    }

    std::vector<std::string> words(n_events);
    for (int e = 0; e < n_events; ++e) {
      if (causal && e == 0)
        words[e] = kCauseWords[pick_cause(rng)];
      else if (causal && e == 1)
        words[e] = kEffectWords[pick_effect(rng)];
      else
        words[e] = kNeutralWords[pick_neutral(rng)];
    }

    rec.tokens.push_back(words[0]);
    rec.mask.push_back(causal ? "I-C" : "O");
    rec.tokens.push_back("near");
    rec.mask.push_back("O");
    rec.tokens.push_back(city_str);
    rec.mask.push_back("O");
    for (int e = 1; e < n_events; ++e) {
      rec.tokens.push_back(causal && e == 1 ? "causing" : "and");
      rec.mask.push_back("O");
      rec.tokens.push_back(words[e]);
      rec.mask.push_back(causal && e == 1 ? "I-E" : "O");
    }
    rec.tweet_text = rec.tokens[0];
    for (size_t t = 1; t < rec.tokens.size(); ++t) rec.tweet_text += " " + rec.tokens[t];

    for (int e = 0; e < n_events; ++e) {
      EventMention ev;
      ev.id = "e" + std::to_string(e + 1);
      ev.trigger = words[e];
      if (has_geo) ev.arguments["location"] = city_str;
      rec.events.push_back(ev);
    }
    rec.causal.relation = causal;
    if (causal) rec.causal.pairs.push_back({"e1", "e2"});

    auto cls = gaussian_vec(config.dim, rng);
    for (double& x : cls) x *= config.semantic_noise;
    if (causal)
      axpy(shared_w * config.semantic_strength, u_shared.data(), cls.data(), config.dim);
    normalize_or_unit(cls);
    for (int e = 0; e < n_events; ++e) {
      EmbeddingRow row;
      row.tweet_id = rec.tweet_id;
      row.event_id = rec.events[e].id;
      row.v_trigger = event_embedding(causal, e, shared_w);
      row.v_cls = cls;
      corpus.embeddings.push_back(std::move(row));
    }
    corpus.records.push_back(std::move(rec));
  }
  sort_chronologically(corpus.records);
  return corpus;
}

void write_embeddings(const std::string& path, const std::vector<EmbeddingRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& row : rows) {
    json j;
    j["tweet_id"] = row.tweet_id;
    j["event_id"] = row.event_id;
    j["v_trigger"] = row.v_trigger;
    j["v_cls"] = row.v_cls;
    out << j.dump() << '\n';
  }
}

Knockout knockout_from_string(const std::string& name) {
  if (name == "none") return Knockout::None;
  if (name == "no_spatial") return Knockout::NoSpatial;
  if (name == "no_temporal") return Knockout::NoTemporal;
  if (name == "no_both") return Knockout::NoBoth;
  throw ConfigError("unknown knockout mode: " + name);
}

const char* to_string(Knockout mode) {
  switch (mode) {
    case Knockout::None: return "none";
    case Knockout::NoSpatial: return "no_spatial";
    case Knockout::NoTemporal: return "no_temporal";
    case Knockout::NoBoth: return "no_both";
  }
  return "none";
}

void apply_knockout(std::vector<double>& features, int semantic_dim, Knockout mode) {
  if (mode == Knockout::None) return;
  if (static_cast<int>(features.size()) != semantic_dim + kTemporalDim + kSpatialDim)
    throw ValidationError("knockout: feature vector has unexpected length");
  if (mode == Knockout::NoTemporal || mode == Knockout::NoBoth)
    std::fill(features.begin() + semantic_dim, features.begin() + semantic_dim + kTemporalDim,
              0.0);
  if (mode == Knockout::NoSpatial || mode == Knockout::NoBoth)
    std::fill(features.begin() + semantic_dim + kTemporalDim, features.end(), 0.0);
}

void apply_knockout(FeatureTable& table, Knockout mode) {
  if (mode == Knockout::None) return;
  for (auto& [key, vec] : table.by_event) apply_knockout(vec, table.semantic_dim, mode);
}

void apply_knockout(WindowGraph& g, int semantic_dim, Knockout mode) {
  if (mode == Knockout::None) return;
  for (auto& node : g.nodes) apply_knockout(node.features, semantic_dim, mode);
}

}  // namespace stc
