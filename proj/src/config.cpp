#include "stcausal/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stcausal/errors.hpp"

namespace stc {

using json = nlohmann::ordered_json;

namespace {

// Marks keys as they are read so finish() can reject unknown ones.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  void real(const char* key, double& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
    out = v->get<double>();
  }

  void integer(const char* key, int& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
    int64_t raw = v->get<int64_t>();
    if (raw < std::numeric_limits<int>::min() || raw > std::numeric_limits<int>::max())
      throw ConfigError(path(key) + ": out of range");
    out = static_cast<int>(raw);
  }

  void integer64(const char* key, int64_t& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
    out = v->get<int64_t>();
  }

  void unsigned64(const char* key, uint64_t& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
    if (!v->is_number_unsigned() && v->get<int64_t>() < 0)
      throw ConfigError(path(key) + ": expected a non-negative integer");
    out = v->get<uint64_t>();
  }

  void text(const char* key, std::string& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
    out = v->get<std::string>();
  }

  void boolean(const char* key, bool& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_boolean()) throw ConfigError(path(key) + ": expected a boolean");
    out = v->get<bool>();
  }

  void latlon(const char* key, LatLon& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
      throw ConfigError(path(key) + ": expected [lat, lon]");
    out.lat = (*v)[0].get<double>();
    out.lon = (*v)[1].get<double>();
  }

  const json* object(const char* key) {
    const json* v = take(key);
    if (v && !v->is_object()) throw ConfigError(path(key) + ": expected an object");
    return v;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(name_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json* take(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string path(const char* key) const { return name_ + "." + key; }

  const json& j_;
  std::string name_;
  std::set<std::string> used_;
};

void apply_json(RunConfig& c, const json& j) {
  Section top(j, "config");
  top.unsigned64("seed", c.seed);
  top.text("dataset", c.dataset);
  top.real("alpha", c.alpha);
  top.integer("location_cap", c.location_cap);
  top.text("knockout", c.knockout);
  top.text("output_dir", c.output_dir);

  if (const json* e = top.object("embeddings")) {
    Section s(*e, "embeddings");
    s.text("source", c.embeddings.source);
    s.text("path", c.embeddings.path);
    s.integer("dim", c.embeddings.dim);
    s.unsigned64("hash_seed", c.embeddings.hash_seed);
    s.finish();
  }
  if (const json* e = top.object("split")) {
    Section s(*e, "split");
    s.real("train", c.split.train);
    s.real("validation", c.split.validation);
    s.real("test", c.split.test);
    s.finish();
  }
  if (const json* e = top.object("window")) {
    Section s(*e, "window");
    s.integer64("window_seconds", c.window.window_seconds);
    s.real("spatial_km", c.window.spatial_km);
    s.real("semantic_threshold", c.window.semantic_threshold);
    s.integer("temporal_neighbors", c.window.temporal_neighbors);
    s.boolean("cross_tweet_pairs", c.window.cross_tweet_pairs);
    s.finish();
  }
  if (const json* e = top.object("model")) {
    Section s(*e, "model");
    s.integer("hidden_dim", c.model.hidden_dim);
    s.integer("heads", c.model.heads);
    s.integer("mlp_hidden", c.model.mlp_hidden);
    s.real("dropout", c.model.dropout);
    s.real("leaky_slope", c.model.leaky_slope);
    s.real("focal_gamma", c.model.focal_gamma);
    s.boolean("class_weighting", c.model.class_weighting);
    s.real("learning_rate", c.model.learning_rate);
    s.integer("batch_size", c.model.batch_size);
    s.integer("max_epochs", c.model.max_epochs);
    s.integer("patience", c.model.patience);
    s.real("threshold", c.model.threshold);
    s.finish();
  }
  if (const json* e = top.object("synth")) {
    Section s(*e, "synth");
    s.integer("tweets", c.synth.tweets);
    s.integer("events_min", c.synth.events_min);
    s.integer("events_max", c.synth.events_max);
    s.real("p_causal", c.synth.p_causal);
    s.real("sigma_s", c.synth.sigma_s);
    s.real("sigma_t", c.synth.sigma_t);
    s.real("semantic_strength", c.synth.semantic_strength);
    s.real("semantic_noise", c.synth.semantic_noise);
    s.integer("dim", c.synth.dim);
    s.integer64("span_start", c.synth.span_start);
    s.integer64("span_end", c.synth.span_end);
    s.real("p_geo", c.synth.p_geo);
    s.integer("locations", c.synth.locations);
    s.integer("hot_locations", c.synth.hot_locations);
    s.latlon("region_min", c.synth.region_min);
    s.latlon("region_max", c.synth.region_max);
    s.unsigned64("seed", c.synth.seed);
    s.finish();
  }
  if (const json* e = top.object("synth_outputs")) {
    Section s(*e, "synth_outputs");
    s.text("dataset_out", c.synth_outputs.dataset_out);
    s.text("embeddings_out", c.synth_outputs.embeddings_out);
    s.finish();
  }
  top.finish();
}

}  // namespace

void RunConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0,1]");
  if (location_cap < 0) throw ConfigError("location_cap must be non-negative");
  if (embeddings.source != "hash" && embeddings.source != "file")
    throw ConfigError("embeddings.source must be 'hash' or 'file'");
  if (embeddings.source == "file" && embeddings.path.empty())
    throw ConfigError("embeddings.path is required when source is 'file'");
  if (embeddings.source == "hash" && embeddings.dim <= 0)
    throw ConfigError("embeddings.dim must be positive");
  if (split.train <= 0.0 || split.validation < 0.0 || split.test < 0.0)
    throw ConfigError("split ratios must be positive for train, non-negative otherwise");
  if (std::fabs(split.train + split.validation + split.test - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");
  if (window.window_seconds <= 0) throw ConfigError("window.window_seconds must be positive");
  if (window.spatial_km <= 0.0) throw ConfigError("window.spatial_km must be positive");
  if (!(window.semantic_threshold >= -1.0 && window.semantic_threshold <= 1.0))
    throw ConfigError("window.semantic_threshold must be in [-1,1]");
  if (window.temporal_neighbors < 0)
    throw ConfigError("window.temporal_neighbors must be non-negative");
  ModelConfig m = model;
  m.input_dim = 1;  // filled by the pipeline, not the config file
  m.validate();
  knockout_from_string(knockout);
  synth.validate();
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  apply_json(c, j);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

void apply_override(RunConfig& config, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value or section.key=value: " + assignment);
  std::string key_path = assignment.substr(0, eq);
  std::string value_text = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::parse_error&) {
    value = value_text;  // bare words are strings
  }

  json nested = value;
  size_t end = key_path.size();
  while (true) {
    auto dot = key_path.rfind('.', end - 1);
    size_t begin = dot == std::string::npos ? 0 : dot + 1;
    std::string part = key_path.substr(begin, end - begin);
    if (part.empty()) throw ConfigError("override has an empty key segment: " + assignment);
    nested = json{{part, nested}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  apply_json(config, nested);
}

std::string resolved_config_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["dataset"] = c.dataset;
  j["embeddings"] = {{"source", c.embeddings.source},
                     {"path", c.embeddings.path},
                     {"dim", c.embeddings.dim},
                     {"hash_seed", c.embeddings.hash_seed}};
  j["alpha"] = c.alpha;
  j["location_cap"] = c.location_cap;
  j["split"] = {{"train", c.split.train},
                {"validation", c.split.validation},
                {"test", c.split.test}};
  j["window"] = {{"window_seconds", c.window.window_seconds},
                 {"spatial_km", c.window.spatial_km},
                 {"semantic_threshold", c.window.semantic_threshold},
                 {"temporal_neighbors", c.window.temporal_neighbors},
                 {"cross_tweet_pairs", c.window.cross_tweet_pairs}};
  j["model"] = {{"input_dim", c.model.input_dim},
                {"hidden_dim", c.model.hidden_dim},
                {"heads", c.model.heads},
                {"mlp_hidden", c.model.mlp_hidden},
                {"dropout", c.model.dropout},
                {"leaky_slope", c.model.leaky_slope},
                {"focal_gamma", c.model.focal_gamma},
                {"class_weighting", c.model.class_weighting},
                {"learning_rate", c.model.learning_rate},
                {"batch_size", c.model.batch_size},
                {"max_epochs", c.model.max_epochs},
                {"patience", c.model.patience},
                {"threshold", c.model.threshold}};
  j["knockout"] = c.knockout;
  j["synth"] = {{"tweets", c.synth.tweets},
                {"events_min", c.synth.events_min},
                {"events_max", c.synth.events_max},
                {"p_causal", c.synth.p_causal},
                {"sigma_s", c.synth.sigma_s},
                {"sigma_t", c.synth.sigma_t},
                {"semantic_strength", c.synth.semantic_strength},
                {"semantic_noise", c.synth.semantic_noise},
                {"dim", c.synth.dim},
                {"span_start", c.synth.span_start},
                {"span_end", c.synth.span_end},
                {"p_geo", c.synth.p_geo},
                {"locations", c.synth.locations},
                {"hot_locations", c.synth.hot_locations},
                {"region_min", {c.synth.region_min.lat, c.synth.region_min.lon}},
                {"region_max", {c.synth.region_max.lat, c.synth.region_max.lon}},
                {"seed", c.synth.seed}};
  j["synth_outputs"] = {{"dataset_out", c.synth_outputs.dataset_out},
                        {"embeddings_out", c.synth_outputs.embeddings_out}};
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

uint64_t config_hash(const RunConfig& c) {
  std::string text = resolved_config_json(c);
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace stc
