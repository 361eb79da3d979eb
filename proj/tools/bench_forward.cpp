#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stcausal/model.hpp"
#include "stcausal/pipeline.hpp"
#include "stcausal/synth.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compare the serial and parallel graph build and forward passes"};
  int tweets = 4000;
  int reps = 3;
  int64_t window_seconds = 1800;
  app.add_option("--tweets", tweets, "synthetic corpus size");
  app.add_option("--reps", reps, "repetitions per measurement");
  app.add_option("--window-seconds", window_seconds, "window width");
  CLI11_PARSE(app, argc, argv);

  stc::SynthConfig sc;
  sc.tweets = tweets;
  stc::SynthCorpus corpus = stc::generate_corpus(sc);

  stc::EmbeddingTable table;
  for (auto& row : corpus.embeddings)
    table.insert(row.tweet_id, row.event_id, row.v_trigger, row.v_cls);

  stc::FeatureTable features = stc::build_features(corpus.records, table, {});
  auto buckets = stc::partition_windows(corpus.records, window_seconds);

  double build_serial = 0.0, build_parallel = 0.0;
  std::vector<stc::WindowGraph> graphs;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    auto serial = stc::build_graphs(corpus.records, buckets, features, {},
                                    /*serial_reference=*/true);
    build_serial += ms_since(t0);
    t0 = Clock::now();
    graphs = stc::build_graphs(corpus.records, buckets, features, {});
    build_parallel += ms_since(t0);
    if (r == 0) {
      for (size_t g = 0; g < graphs.size(); ++g)
        if (graphs[g].nodes.size() != serial[g].nodes.size() ||
            graphs[g].edges.size() != serial[g].edges.size()) {
          std::printf("graph build mismatch at window %zu\n", g);
          return 1;
        }
    }
  }

  stc::ModelConfig mc;
  mc.input_dim = features.dim();
  stc::GatModel model = stc::init_model(mc, 7);

  std::vector<stc::GraphView> views;
  views.reserve(graphs.size());
  size_t nodes = 0;
  for (const auto& g : graphs) {
    views.push_back(stc::make_graph_view(g));
    nodes += g.nodes.size();
  }

  double enc_serial = 0.0, enc_parallel = 0.0, max_diff = 0.0;
  for (int r = 0; r < reps; ++r) {
    for (const auto& view : views) {
      auto t0 = Clock::now();
      stc::Matrix hs =
          stc::encode_nodes(model, view, /*training=*/false, nullptr, nullptr, /*parallel=*/false);
      enc_serial += ms_since(t0);
      t0 = Clock::now();
      stc::Matrix hp =
          stc::encode_nodes(model, view, /*training=*/false, nullptr, nullptr, /*parallel=*/true);
      enc_parallel += ms_since(t0);
      for (size_t i = 0; i < hs.v.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(hs.v[i] - hp.v[i]));
    }
  }

  std::printf("corpus: %d tweets, %zu graphs, %zu nodes, input_dim %d\n", tweets, graphs.size(),
              nodes, features.dim());
  std::printf("graph_build: serial %.1f ms, parallel %.1f ms, speedup %.2fx\n",
              build_serial / reps, build_parallel / reps, build_serial / build_parallel);
  std::printf("encode: serial %.1f ms, parallel %.1f ms, speedup %.2fx\n", enc_serial / reps,
              enc_parallel / reps, enc_serial / enc_parallel);
  std::printf("encode max |serial - parallel|: %.3g\n", max_diff);
  return 0;
}
