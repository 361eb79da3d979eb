#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stcausal/config.hpp"
#include "stcausal/pipeline.hpp"

namespace {

stc::RunConfig make_config(const std::string& path, const std::vector<std::string>& sets) {
  stc::RunConfig c;
  if (!path.empty()) c = stc::load_run_config(path);
  for (const auto& s : sets) stc::apply_override(c, s);
  c.validate();
  return c;
}

void require_dataset(const stc::RunConfig& c) {
  if (c.dataset.empty())
    throw stc::ConfigError("dataset path is required (config key 'dataset')");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal link discovery over spatio-temporal event graphs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string ingest_path;
  std::string dump_path;
  std::string checkpoint_path;
  std::string dataset_path;
  std::string metrics_out;
  std::string links_out;
  std::string csv_out;
  double threshold = -1.0;

  CLI::App* ingest = app.add_subcommand("ingest", "validate a dataset file and report problems");
  ingest->add_option("dataset", ingest_path, "JSONL dataset path")->required();

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted links");
  synth->add_option("--config", config_path, "JSON config file");
  synth->add_option("--set", sets, "override, section.key=value");

  CLI::App* build = app.add_subcommand("build-graphs", "build window graphs and print stats");
  build->add_option("--config", config_path, "JSON config file");
  build->add_option("--set", sets, "override, section.key=value");
  build->add_option("--dump", dump_path, "write the graphs to this JSONL file");

  CLI::App* train = app.add_subcommand("train", "train a model and evaluate the test split");
  train->add_option("--config", config_path, "JSON config file");
  train->add_option("--set", sets, "override, section.key=value");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint.json path")->required();
  eval->add_option("--dataset", dataset_path, "JSONL dataset path")->required();
  eval->add_option("--metrics-out", metrics_out, "write the metrics JSON here too");

  CLI::App* predict = app.add_subcommand("predict", "write predicted causal links as JSONL");
  predict->add_option("--checkpoint", checkpoint_path, "checkpoint.json path")->required();
  predict->add_option("--dataset", dataset_path, "JSONL dataset path")->required();
  predict->add_option("--out", links_out, "output JSONL path")->required();
  predict->add_option("--threshold", threshold, "score cutoff, defaults to the checkpoint's");

  CLI::App* ablation = app.add_subcommand("ablation", "train once, evaluate feature knockouts");
  ablation->add_option("--config", config_path, "JSON config file");
  ablation->add_option("--set", sets, "override, section.key=value");
  ablation->add_option("--csv", csv_out, "write the result table here too");

  try {
    app.parse(argc, argv);

    if (*ingest) return stc::cmd_ingest(ingest_path, std::cout);

    if (*synth) {
      stc::RunConfig c = make_config(config_path, sets);
      stc::cmd_synth(c);
      std::cout << "dataset: " << c.synth_outputs.dataset_out << "\n"
                << "embeddings: " << c.synth_outputs.embeddings_out << "\n";
      return 0;
    }
    if (*build) {
      stc::RunConfig c = make_config(config_path, sets);
      require_dataset(c);
      stc::cmd_build_graphs(c, dump_path, std::cout);
      return 0;
    }
    if (*train) {
      stc::RunConfig c = make_config(config_path, sets);
      require_dataset(c);
      stc::TrainArtifacts art = stc::cmd_train(c);
      std::cout << "output_dir: " << art.out_dir << "\n"
                << stc::report_json(art.test_report) << "\n";
      return 0;
    }
    if (*eval) {
      stc::EvalReport report = stc::cmd_eval(checkpoint_path, dataset_path, metrics_out);
      std::cout << stc::report_json(report) << "\n";
      return 0;
    }
    if (*predict) {
      stc::cmd_predict(checkpoint_path, dataset_path, threshold, links_out);
      std::cout << "links: " << links_out << "\n";
      return 0;
    }
    if (*ablation) {
      stc::RunConfig c = make_config(config_path, sets);
      require_dataset(c);
      auto rows = stc::cmd_ablation(c, csv_out);
      std::cout << stc::ablation_csv(rows);
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const stc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
