#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "stcausal/graph.hpp"
#include "stcausal/linalg.hpp"
#include "stcausal/metrics.hpp"

namespace stc {

struct ModelConfig {
  int input_dim = 0;   // node feature dimension, set from the feature table
  int hidden_dim = 32;
  int heads = 4;
  int mlp_hidden = 32;
  double dropout = 0.1;
  double leaky_slope = 0.2;
  double focal_gamma = 2.0;
  bool class_weighting = true;
  double learning_rate = 0.001;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 10;
  double threshold = 0.5;

  int head_dim() const { return hidden_dim / heads; }
  void validate() const;  // throws ConfigError
};

struct HeadParams {
  Matrix weight;             // in x out
  std::vector<double> attn;  // 2*out: first half scores the center, second the neighbor
};

struct LayerParams {
  std::vector<HeadParams> heads;
};

struct MlpParams {
  Matrix w1;  // 2*hidden x mlp_hidden
  std::vector<double> b1;
  Matrix w2;  // mlp_hidden x 2
  std::vector<double> b2;
};

struct ModelParams {
  LayerParams layer1;  // input_dim -> head_dim per head, heads concatenated
  Matrix residual1;    // input_dim x hidden_dim
  LayerParams layer2;  // hidden -> hidden per head, heads averaged, identity residual
  MlpParams mlp;
};

// Every parameter tensor in a fixed order; Adam, serialization, and the
// finite-difference check all walk this list.
std::vector<std::vector<double>*> param_tensors(ModelParams& p);
std::vector<const std::vector<double>*> param_tensors(const ModelParams& p);

ModelParams zero_params(const ModelConfig& config);

struct GatModel {
  ModelConfig config;
  ModelParams params;
};

// Uniform(+-sqrt(6/(fan_in+fan_out))) matrices, zero biases.
GatModel init_model(const ModelConfig& config, uint64_t seed);

// Symmetric adjacency with a self-loop on every node, CSR layout, rows sorted.
struct GraphView {
  int n = 0;
  std::vector<int> offsets;  // n+1
  std::vector<int> nbrs;
  Matrix h0;  // n x input_dim
};

GraphView make_graph_view(const WindowGraph& g);

// Attention row for one node over the given neighbor list (already including
// the self-loop if wanted): softmax_u LeakyReLU(a . [h_v W || h_u W]).
std::vector<double> attention_coefficients(const Matrix& weight, const std::vector<double>& attn,
                                           const Matrix& h, int v, const std::vector<int>& nbrs,
                                           double leaky_slope);

enum class HeadMode { Concat, Average };

struct LayerCache {
  std::vector<Matrix> proj;                    // per head: n x out
  std::vector<std::vector<double>> pre;        // per head: raw scores, nbr-aligned
  std::vector<std::vector<double>> attn;       // per head: softmax rows, nbr-aligned
  std::vector<std::vector<double>> attn_used;  // after attention dropout
  std::vector<Matrix> summed;                  // per head: n x out, pre-activation
  Matrix out;
};

// residual_proj == nullptr means identity residual (dims must match).
Matrix gat_layer_forward(const LayerParams& layer, const Matrix* residual_proj, HeadMode mode,
                         const GraphView& view, const Matrix& h_in, double leaky_slope,
                         bool training, double dropout_rate, std::mt19937_64* rng,
                         LayerCache* cache, bool parallel);

struct GraphCache {
  LayerCache l1, l2;
};

// Two GAT layers; returns the n x hidden node embeddings.
Matrix encode_nodes(const GatModel& model, const GraphView& view, bool training,
                    std::mt19937_64* rng, GraphCache* cache, bool parallel);

struct PairCache {
  int i = 0, j = 0;
  std::vector<double> x;     // [h_i || h_j]
  std::vector<double> z1;    // pre-activation hidden
  std::vector<double> a1;    // post-ReLU (and dropout) hidden
  std::vector<double> mask;  // dropout keep-scale per hidden unit
  std::array<double, 2> logits{};
  std::array<double, 2> prob{};
};

std::array<double, 2> classify_pair(const GatModel& model, const Matrix& h, int i, int j,
                                    bool training, std::mt19937_64* rng, PairCache* cache);

double focal_loss(const std::array<double, 2>& prob, int label, double alpha_t, double gamma);
std::array<double, 2> focal_logit_grad(const std::array<double, 2>& prob, int label,
                                       double alpha_t, double gamma);

struct BatchPair {
  int i = 0;
  int j = 0;
  int label = 0;
};

struct BatchResult {
  std::vector<std::array<double, 2>> prob;
  double mean_loss = 0.0;
};

BatchResult forward_batch(const GatModel& model, const GraphView& view,
                          const std::vector<BatchPair>& pairs,
                          const std::array<double, 2>& class_weights, bool training,
                          std::mt19937_64* rng, GraphCache* gcache,
                          std::vector<PairCache>* pcaches);

// Accumulates d(scale * sum_k loss_k)/d(params) into grad. Needs the caches
// produced by a training-mode forward_batch.
void backward_batch(const GatModel& model, const GraphView& view, const GraphCache& gcache,
                    const std::vector<PairCache>& pcaches, const std::vector<BatchPair>& pairs,
                    const std::array<double, 2>& class_weights, double scale, ModelParams& grad);

struct AdamState {
  ModelParams m;
  ModelParams v;
  int64_t step = 0;
};

// Throws on non-finite gradients.
void adam_step(ModelParams& params, const ModelParams& grad, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainPair {
  int graph = 0;
  int i = 0;
  int j = 0;
  int label = 0;
};

std::array<double, 2> inverse_frequency_weights(const std::vector<TrainPair>& pairs);

struct TrainResult {
  GatModel model;  // parameters from the best validation epoch
  std::vector<EpochStats> history;
  int best_epoch = -1;
  std::array<double, 2> class_weights{1.0, 1.0};
};

TrainResult train_model(const ModelConfig& config, const std::vector<GraphView>& views,
                        const std::vector<TrainPair>& train_pairs,
                        const std::vector<TrainPair>& val_pairs, uint64_t seed);

struct PredictedLink {
  int i = 0;
  int j = 0;
  double score = 0.0;
};

std::vector<PredictedLink> predict_links(const GatModel& model, const GraphView& view,
                                         const std::vector<CandidatePair>& pairs,
                                         double threshold);

}  // namespace stc
