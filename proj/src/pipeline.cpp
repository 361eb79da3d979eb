#include "stcausal/pipeline.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace stc {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::unique_ptr<EmbeddingSource> make_embedding_source(const RunConfig& config) {
  if (config.embeddings.source == "hash")
    return std::make_unique<HashEmbedder>(config.embeddings.dim, config.embeddings.hash_seed);
  if (config.embeddings.source == "file")
    return std::make_unique<EmbeddingTable>(EmbeddingTable::load(config.embeddings.path));
  throw ConfigError("embeddings.source must be 'hash' or 'file'");
}

std::vector<WindowGraph> prepare_graphs(const std::vector<TweetRecord>& records,
                                        const EmbeddingSource& source, const RunConfig& config) {
  std::vector<TweetRecord> sorted = records;
  sort_chronologically(sorted);
  FeatureTable features = build_features(sorted, source, {config.alpha, config.location_cap});
  auto buckets = partition_windows(sorted, config.window.window_seconds);
  auto graphs = build_graphs(sorted, buckets, features, config.window);
  Knockout mode = knockout_from_string(config.knockout);
  if (mode != Knockout::None)
    for (auto& g : graphs) apply_knockout(g, features.semantic_dim, mode);
  return graphs;
}

std::vector<TrainPair> collect_pairs(const std::vector<WindowGraph>& graphs) {
  std::vector<TrainPair> out;
  for (size_t gi = 0; gi < graphs.size(); ++gi)
    for (const auto& p : graphs[gi].pairs)
      out.push_back({static_cast<int>(gi), p.a, p.b, p.label});
  return out;
}

namespace {

json tensor_json(const std::vector<double>& v) { return json(v); }

std::vector<double> tensor_from_json(const json& j, size_t expected, const std::string& name) {
  if (!j.is_array() || j.size() != expected)
    throw ValidationError("checkpoint: " + name + " must be an array of " +
                          std::to_string(expected) + " numbers");
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& x : j) {
    if (!x.is_number()) throw ValidationError("checkpoint: " + name + " must be numeric");
    out.push_back(x.get<double>());
  }
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double stat_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json history_json(const std::vector<EpochStats>& history) {
  json rows = json::array();
  for (const auto& e : history) {
    json row;
    row["train_loss"] = e.train_loss;
    row["val_loss"] = e.val_loss;
    if (std::isnan(e.val_auc))
      row["val_auc"] = nullptr;
    else
      row["val_auc"] = e.val_auc;
    rows.push_back(std::move(row));
  }
  return rows;
}

// Everything built from one config + dataset that the commands share.
struct PreparedData {
  std::unique_ptr<EmbeddingSource> source;
  int input_dim = 0;
  DatasetSplit split;
  std::vector<WindowGraph> train_graphs, val_graphs, test_graphs;
};

PreparedData prepare_splits(const RunConfig& config) {
  PreparedData d;
  d.source = make_embedding_source(config);
  d.input_dim = d.source->dim() + kTemporalDim + kSpatialDim;
  auto records = load_dataset(config.dataset);
  if (records.empty()) throw ValidationError("dataset " + config.dataset + " has no records");
  sort_chronologically(records);
  d.split = split_dataset(records, config.split, config.seed);
  d.train_graphs = prepare_graphs(d.split.train, *d.source, config);
  d.val_graphs = prepare_graphs(d.split.validation, *d.source, config);
  d.test_graphs = prepare_graphs(d.split.test, *d.source, config);
  return d;
}

struct Scored {
  std::vector<double> scores;
  std::vector<int> labels;
};

Scored score_graphs(const GatModel& model, const std::vector<WindowGraph>& graphs) {
  Scored s;
  for (const auto& g : graphs) {
    if (g.pairs.empty()) continue;
    GraphView view = make_graph_view(g);
    Matrix h = encode_nodes(model, view, /*training=*/false, nullptr, nullptr, /*parallel=*/true);
    for (const auto& p : g.pairs) {
      auto prob = classify_pair(model, h, p.a, p.b, /*training=*/false, nullptr, nullptr);
      s.scores.push_back(prob[1]);
      s.labels.push_back(p.label);
    }
  }
  return s;
}

TrainResult run_training(const RunConfig& config, const PreparedData& d, ModelConfig& mconfig) {
  mconfig = config.model;
  mconfig.input_dim = d.input_dim;
  std::vector<GraphView> views;
  views.reserve(d.train_graphs.size() + d.val_graphs.size());
  for (const auto& g : d.train_graphs) views.push_back(make_graph_view(g));
  for (const auto& g : d.val_graphs) views.push_back(make_graph_view(g));
  auto train_pairs = collect_pairs(d.train_graphs);
  auto val_pairs = collect_pairs(d.val_graphs);
  int offset = static_cast<int>(d.train_graphs.size());
  for (auto& p : val_pairs) p.graph += offset;
  return train_model(mconfig, views, train_pairs, val_pairs, config.seed);
}

std::string stamped_dir(const RunConfig& config) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64 "-s%" PRIu64, config_hash(config), config.seed);
  return config.output_dir + "/" + buf;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  json j;
  j["version"] = ck.version;
  j["config"] = json::parse(resolved_config_json(ck.config));
  j["class_weights"] = {ck.class_weights[0], ck.class_weights[1]};
  j["best_epoch"] = ck.best_epoch;
  j["history"] = history_json(ck.history);
  json tensors = json::array();
  for (const auto* t : param_tensors(ck.model.params)) tensors.push_back(tensor_json(*t));
  j["tensors"] = std::move(tensors);
  write_text(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("checkpoint " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != 1)
    throw ValidationError("checkpoint " + path + ": unsupported version");
  if (!j.contains("config") || !j["config"].is_object())
    throw ValidationError("checkpoint " + path + ": missing config");

  Checkpoint ck;
  // input_dim lives outside the strict config schema; peel it off first
  json cfg = j["config"];
  int input_dim = 0;
  if (cfg.contains("model") && cfg["model"].is_object() && cfg["model"].contains("input_dim")) {
    if (!cfg["model"]["input_dim"].is_number_integer())
      throw ValidationError("checkpoint " + path + ": model.input_dim must be an integer");
    input_dim = cfg["model"]["input_dim"].get<int>();
    cfg["model"].erase("input_dim");
  }
  ck.config = parse_run_config(cfg.dump());
  ck.config.model.input_dim = input_dim;
  if (input_dim <= 0) throw ValidationError("checkpoint " + path + ": invalid input_dim");

  if (j.contains("class_weights")) {
    auto w = tensor_from_json(j["class_weights"], 2, "class_weights");
    ck.class_weights = {w[0], w[1]};
  }
  if (j.contains("best_epoch") && j["best_epoch"].is_number_integer())
    ck.best_epoch = j["best_epoch"].get<int>();
  if (j.contains("history") && j["history"].is_array()) {
    for (const auto& row : j["history"]) {
      EpochStats e;
      e.train_loss = row.value("train_loss", 0.0);
      e.val_loss = row.value("val_loss", 0.0);
      e.val_auc = row.contains("val_auc") ? stat_or_nan(row["val_auc"]) : 0.0;
      ck.history.push_back(e);
    }
  }

  ck.model.config = ck.config.model;
  ck.model.params = zero_params(ck.model.config);
  auto slots = param_tensors(ck.model.params);
  if (!j.contains("tensors") || !j["tensors"].is_array() || j["tensors"].size() != slots.size())
    throw ValidationError("checkpoint " + path + ": expected " + std::to_string(slots.size()) +
                          " tensors");
  for (size_t t = 0; t < slots.size(); ++t)
    *slots[t] = tensor_from_json(j["tensors"][t], slots[t]->size(),
                                 "tensor " + std::to_string(t));
  return ck;
}

int cmd_ingest(const std::string& dataset_path, std::ostream& out) {
  ValidationReport report;
  load_dataset(dataset_path, &report);
  out << format_report(report);
  return report.failed == 0 ? 0 : 1;
}

void cmd_synth(const RunConfig& config) {
  SynthCorpus corpus = generate_corpus(config.synth);
  write_dataset(config.synth_outputs.dataset_out, corpus.records);
  write_embeddings(config.synth_outputs.embeddings_out, corpus.embeddings);
}

void cmd_build_graphs(const RunConfig& config, const std::string& dump_path, std::ostream& out) {
  auto source = make_embedding_source(config);
  auto records = load_dataset(config.dataset);
  auto graphs = prepare_graphs(records, *source, config);
  GraphStats s = total_stats(graphs);
  out << "graphs: " << graphs.size() << "\n"
      << "event_nodes: " << s.event_nodes << "\n"
      << "spatial_nodes: " << s.spatial_nodes << "\n"
      << "temporal_nodes: " << s.temporal_nodes << "\n"
      << "contextual_edges: " << s.contextual_edges << "\n"
      << "spatial_edges: " << s.spatial_edges << "\n"
      << "temporal_edges: " << s.temporal_edges << "\n"
      << "positive_pairs: " << s.positive_pairs << "\n"
      << "negative_pairs: " << s.negative_pairs << "\n";
  if (!dump_path.empty()) write_graphs(dump_path, graphs);
}

TrainArtifacts cmd_train(const RunConfig& config) {
  config.validate();
  PreparedData d = prepare_splits(config);
  ModelConfig mconfig;
  TrainResult trained = run_training(config, d, mconfig);

  Scored test = score_graphs(trained.model, d.test_graphs);
  EvalReport report = evaluate(test.scores, test.labels, config.model.threshold);

  RunConfig resolved = config;
  resolved.model.input_dim = mconfig.input_dim;

  TrainArtifacts art;
  art.out_dir = stamped_dir(config);
  fs::create_directories(art.out_dir);
  art.checkpoint_path = art.out_dir + "/checkpoint.json";
  art.curves_path = art.out_dir + "/curves.csv";
  art.metrics_path = art.out_dir + "/metrics.json";
  art.config_path = art.out_dir + "/config.json";
  art.test_report = report;

  Checkpoint ck;
  ck.config = resolved;
  ck.model = trained.model;
  ck.class_weights = trained.class_weights;
  ck.history = trained.history;
  ck.best_epoch = trained.best_epoch;
  save_checkpoint(art.checkpoint_path, ck);
  write_text(art.curves_path, curves_csv(trained.history));
  write_text(art.metrics_path, report_json(report) + "\n");
  write_text(art.config_path, resolved_config_json(resolved));
  return art;
}

EvalReport cmd_eval(const std::string& checkpoint_path, const std::string& dataset_path,
                    const std::string& metrics_out) {
  Checkpoint ck = load_checkpoint(checkpoint_path);
  auto source = make_embedding_source(ck.config);
  if (source->dim() + kTemporalDim + kSpatialDim != ck.config.model.input_dim)
    throw ValidationError("eval: embedding source dimension does not match the checkpoint");
  auto records = load_dataset(dataset_path);
  auto graphs = prepare_graphs(records, *source, ck.config);
  Scored s = score_graphs(ck.model, graphs);
  EvalReport report = evaluate(s.scores, s.labels, ck.config.model.threshold);
  if (!metrics_out.empty()) write_text(metrics_out, report_json(report) + "\n");
  return report;
}

void cmd_predict(const std::string& checkpoint_path, const std::string& dataset_path,
                 double threshold, const std::string& links_out) {
  Checkpoint ck = load_checkpoint(checkpoint_path);
  auto source = make_embedding_source(ck.config);
  if (source->dim() + kTemporalDim + kSpatialDim != ck.config.model.input_dim)
    throw ValidationError("predict: embedding source dimension does not match the checkpoint");
  if (!(threshold >= 0.0)) threshold = ck.config.model.threshold;
  auto records = load_dataset(dataset_path);
  auto graphs = prepare_graphs(records, *source, ck.config);

  std::ostringstream out;
  for (const auto& g : graphs) {
    if (g.pairs.empty()) continue;
    GraphView view = make_graph_view(g);
    auto links = predict_links(ck.model, view, g.pairs, threshold);
    for (const auto& link : links) {
      const Node& cause = g.nodes[link.i];
      const Node& effect = g.nodes[link.j];
      json row;
      row["window_index"] = g.window_index;
      row["cause"] = {{"tweet_id", cause.tweet_id}, {"event_id", cause.event_id}};
      row["effect"] = {{"tweet_id", effect.tweet_id}, {"event_id", effect.event_id}};
      row["score"] = link.score;
      out << row.dump() << '\n';
    }
  }
  write_text(links_out, out.str());
}

std::vector<AblationRow> cmd_ablation(const RunConfig& config, const std::string& csv_out) {
  RunConfig base = config;
  base.knockout = "none";
  base.validate();
  PreparedData d = prepare_splits(base);
  ModelConfig mconfig;
  TrainResult trained = run_training(base, d, mconfig);

  int semantic_dim = d.source->dim();
  std::vector<AblationRow> rows;
  for (const char* name : {"none", "no_spatial", "no_temporal", "no_both"}) {
    Knockout mode = knockout_from_string(name);
    std::vector<WindowGraph> graphs = d.test_graphs;
    if (mode != Knockout::None)
      for (auto& g : graphs) apply_knockout(g, semantic_dim, mode);
    Scored s = score_graphs(trained.model, graphs);
    rows.push_back({name, evaluate(s.scores, s.labels, base.model.threshold)});
  }
  if (!csv_out.empty()) write_text(csv_out, ablation_csv(rows));
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "configuration,precision,recall,f1,auc,accuracy\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.configuration.c_str(), r.report.precision, r.report.recall, r.report.f1,
                  r.report.auc, r.report.accuracy);
    out << buf;
  }
  return out.str();
}

}  // namespace stc
