#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "stcausal/config.hpp"
#include "stcausal/model.hpp"
#include "stcausal/synth.hpp"

namespace stc {

std::unique_ptr<EmbeddingSource> make_embedding_source(const RunConfig& config);

// Features -> windows -> graphs -> knockout for one record partition.
std::vector<WindowGraph> prepare_graphs(const std::vector<TweetRecord>& records,
                                        const EmbeddingSource& source, const RunConfig& config);

std::vector<TrainPair> collect_pairs(const std::vector<WindowGraph>& graphs);

struct Checkpoint {
  int version = 1;
  RunConfig config;
  GatModel model;
  std::array<double, 2> class_weights{1.0, 1.0};
  std::vector<EpochStats> history;
  int best_epoch = -1;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);  // validates shapes against config

struct TrainArtifacts {
  std::string out_dir;
  std::string checkpoint_path;
  std::string curves_path;
  std::string metrics_path;
  std::string config_path;
  EvalReport test_report;
};

// Command bodies shared by the CLI and the test suites. All paths in the
// config are taken as given; outputs land in a directory stamped with the
// config hash and seed.
int cmd_ingest(const std::string& dataset_path, std::ostream& out);
void cmd_synth(const RunConfig& config);
void cmd_build_graphs(const RunConfig& config, const std::string& dump_path, std::ostream& out);
TrainArtifacts cmd_train(const RunConfig& config);
EvalReport cmd_eval(const std::string& checkpoint_path, const std::string& dataset_path,
                    const std::string& metrics_out);
void cmd_predict(const std::string& checkpoint_path, const std::string& dataset_path,
                 double threshold, const std::string& links_out);

struct AblationRow {
  std::string configuration;
  EvalReport report;
};

std::vector<AblationRow> cmd_ablation(const RunConfig& config, const std::string& csv_out);
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace stc
