#include "stcausal/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stc {

void ModelConfig::validate() const {
  if (input_dim <= 0) throw ConfigError("model: input_dim must be positive");
  if (hidden_dim <= 0) throw ConfigError("model: hidden_dim must be positive");
  if (heads <= 0) throw ConfigError("model: heads must be positive");
  if (hidden_dim % heads != 0)
    throw ConfigError("model: hidden_dim " + std::to_string(hidden_dim) +
                      " not divisible by heads " + std::to_string(heads));
  if (mlp_hidden <= 0) throw ConfigError("model: mlp_hidden must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model: dropout must be in [0,1)");
  if (leaky_slope <= 0.0) throw ConfigError("model: leaky_slope must be positive");
  if (focal_gamma < 0.0) throw ConfigError("model: focal_gamma must be non-negative");
  if (learning_rate <= 0.0) throw ConfigError("model: learning_rate must be positive");
  if (batch_size <= 0) throw ConfigError("model: batch_size must be positive");
  if (max_epochs <= 0) throw ConfigError("model: max_epochs must be positive");
  if (patience < 0) throw ConfigError("model: patience must be non-negative");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ConfigError("model: threshold must be in [0,1]");
}

std::vector<std::vector<double>*> param_tensors(ModelParams& p) {
  std::vector<std::vector<double>*> out;
  for (auto& h : p.layer1.heads) {
    out.push_back(&h.weight.v);
    out.push_back(&h.attn);
  }
  out.push_back(&p.residual1.v);
  for (auto& h : p.layer2.heads) {
    out.push_back(&h.weight.v);
    out.push_back(&h.attn);
  }
  out.push_back(&p.mlp.w1.v);
  out.push_back(&p.mlp.b1);
  out.push_back(&p.mlp.w2.v);
  out.push_back(&p.mlp.b2);
  return out;
}

std::vector<const std::vector<double>*> param_tensors(const ModelParams& p) {
  auto mut = param_tensors(const_cast<ModelParams&>(p));
  return {mut.begin(), mut.end()};
}

ModelParams zero_params(const ModelConfig& c) {
  ModelParams p;
  p.layer1.heads.resize(c.heads);
  for (auto& h : p.layer1.heads) {
    h.weight = Matrix(c.input_dim, c.head_dim());
    h.attn.assign(2 * c.head_dim(), 0.0);
  }
  p.residual1 = Matrix(c.input_dim, c.hidden_dim);
  p.layer2.heads.resize(c.heads);
  for (auto& h : p.layer2.heads) {
    h.weight = Matrix(c.hidden_dim, c.hidden_dim);
    h.attn.assign(2 * c.hidden_dim, 0.0);
  }
  p.mlp.w1 = Matrix(2 * c.hidden_dim, c.mlp_hidden);
  p.mlp.b1.assign(c.mlp_hidden, 0.0);
  p.mlp.w2 = Matrix(c.mlp_hidden, 2);
  p.mlp.b2.assign(2, 0.0);
  return p;
}

namespace {

void glorot_fill(std::vector<double>& v, int fan_in, int fan_out, std::mt19937_64& rng) {
  double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& x : v) x = dist(rng);
}

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

}  // namespace

GatModel init_model(const ModelConfig& config, uint64_t seed) {
  config.validate();
  GatModel model;
  model.config = config;
  model.params = zero_params(config);
  std::mt19937_64 rng(seed);
  for (auto& h : model.params.layer1.heads) {
    glorot_fill(h.weight.v, h.weight.rows, h.weight.cols, rng);
    glorot_fill(h.attn, static_cast<int>(h.attn.size()), 1, rng);
  }
  glorot_fill(model.params.residual1.v, model.params.residual1.rows, model.params.residual1.cols,
              rng);
  for (auto& h : model.params.layer2.heads) {
    glorot_fill(h.weight.v, h.weight.rows, h.weight.cols, rng);
    glorot_fill(h.attn, static_cast<int>(h.attn.size()), 1, rng);
  }
  glorot_fill(model.params.mlp.w1.v, model.params.mlp.w1.rows, model.params.mlp.w1.cols, rng);
  glorot_fill(model.params.mlp.w2.v, model.params.mlp.w2.rows, model.params.mlp.w2.cols, rng);
  return model;
}

GraphView make_graph_view(const WindowGraph& g) {
  GraphView view;
  view.n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> adj(view.n);
  for (int v = 0; v < view.n; ++v) adj[v].push_back(v);
  for (const auto& e : g.edges) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  view.offsets.assign(view.n + 1, 0);
  for (int v = 0; v < view.n; ++v) {
    auto& row = adj[v];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    view.offsets[v + 1] = view.offsets[v] + static_cast<int>(row.size());
  }
  view.nbrs.reserve(view.offsets.back());
  for (auto& row : adj) view.nbrs.insert(view.nbrs.end(), row.begin(), row.end());

  if (view.n > 0) {
    int dim = static_cast<int>(g.nodes[0].features.size());
    view.h0 = Matrix(view.n, dim);
    for (int v = 0; v < view.n; ++v) {
      if (static_cast<int>(g.nodes[v].features.size()) != dim)
        throw ValidationError("graph view: node feature dimensions are not uniform");
      std::copy(g.nodes[v].features.begin(), g.nodes[v].features.end(), view.h0.row(v));
    }
  }
  return view;
}

std::vector<double> attention_coefficients(const Matrix& weight, const std::vector<double>& attn,
                                           const Matrix& h, int v, const std::vector<int>& nbrs,
                                           double leaky_slope) {
  int out = weight.cols;
  if (static_cast<int>(attn.size()) != 2 * out)
    throw ValidationError("attention: expected attn vector of length 2*out");
  std::vector<double> sv(out), su(out), scores(nbrs.size());
  project_row(h.row(v), weight, sv.data());
  double pv = dot(attn.data(), sv.data(), out);
  for (size_t k = 0; k < nbrs.size(); ++k) {
    project_row(h.row(nbrs[k]), weight, su.data());
    double pre = pv + dot(attn.data() + out, su.data(), out);
    scores[k] = pre > 0.0 ? pre : leaky_slope * pre;
  }
  double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    sum += s;
  }
  for (double& s : scores) s /= sum;
  return scores;
}

Matrix gat_layer_forward(const LayerParams& layer, const Matrix* residual_proj, HeadMode mode,
                         const GraphView& view, const Matrix& h_in, double leaky_slope,
                         bool training, double dropout_rate, std::mt19937_64* rng,
                         LayerCache* cache, bool parallel) {
  const int heads = static_cast<int>(layer.heads.size());
  const int out_dim = layer.heads[0].weight.cols;
  const int n = view.n;
  const int total = view.offsets.back();
  const bool use_dropout = training && dropout_rate > 0.0;
  if (use_dropout && rng == nullptr)
    throw std::runtime_error("gat_layer_forward: dropout requires an RNG");
  if (use_dropout) parallel = false;  // dropout draws are ordered

  LayerCache local;
  LayerCache& c = cache ? *cache : local;
  c.proj.assign(heads, Matrix());
  c.pre.assign(heads, {});
  c.attn.assign(heads, {});
  c.attn_used.assign(heads, {});
  c.summed.assign(heads, Matrix());

  for (int h = 0; h < heads; ++h) {
    const Matrix& w = layer.heads[h].weight;
    const std::vector<double>& a = layer.heads[h].attn;
    Matrix& s = c.proj[h];
    s = Matrix(n, out_dim);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int v = 0; v < n; ++v) project_row(h_in.row(v), w, s.row(v));

    std::vector<double> p(n), q(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int v = 0; v < n; ++v) {
      p[v] = dot(a.data(), s.row(v), out_dim);
      q[v] = dot(a.data() + out_dim, s.row(v), out_dim);
    }

    auto& pre = c.pre[h];
    auto& attn = c.attn[h];
    pre.assign(total, 0.0);
    attn.assign(total, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int v = 0; v < n; ++v) {
      int b = view.offsets[v], e = view.offsets[v + 1];
      double mx = -std::numeric_limits<double>::infinity();
      for (int k = b; k < e; ++k) {
        double raw = p[v] + q[view.nbrs[k]];
        pre[k] = raw;
        double act = raw > 0.0 ? raw : leaky_slope * raw;
        attn[k] = act;
        mx = std::max(mx, act);
      }
      double sum = 0.0;
      for (int k = b; k < e; ++k) {
        attn[k] = std::exp(attn[k] - mx);
        sum += attn[k];
      }
      for (int k = b; k < e; ++k) attn[k] /= sum;
    }

    auto& used = c.attn_used[h];
    used = attn;
    if (use_dropout) {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      double keep_scale = 1.0 / (1.0 - dropout_rate);
      for (int k = 0; k < total; ++k)
        used[k] = unit(*rng) < dropout_rate ? 0.0 : used[k] * keep_scale;
    }

    Matrix& summed = c.summed[h];
    summed = Matrix(n, out_dim);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int v = 0; v < n; ++v) {
      double* row = summed.row(v);
      for (int k = view.offsets[v]; k < view.offsets[v + 1]; ++k)
        axpy(used[k], s.row(view.nbrs[k]), row, out_dim);
    }
  }

  const int final_dim = mode == HeadMode::Concat ? heads * out_dim : out_dim;
  if (mode == HeadMode::Average && h_in.cols != out_dim)
    throw ValidationError("gat layer: identity residual needs matching dims");
  if (mode == HeadMode::Concat && residual_proj == nullptr && h_in.cols != final_dim)
    throw ValidationError("gat layer: missing residual projection");
  c.out = Matrix(n, final_dim);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (int v = 0; v < n; ++v) {
    double* row = c.out.row(v);
    if (mode == HeadMode::Concat) {
      for (int h = 0; h < heads; ++h) {
        const double* sr = c.summed[h].row(v);
        for (int d = 0; d < out_dim; ++d) row[h * out_dim + d] = elu(sr[d]);
      }
      if (residual_proj)
        for (int i = 0; i < h_in.cols; ++i)
          axpy(h_in.at(v, i), residual_proj->row(i), row, final_dim);
      else
        axpy(1.0, h_in.row(v), row, final_dim);
    } else {
      for (int h = 0; h < heads; ++h) {
        const double* sr = c.summed[h].row(v);
        for (int d = 0; d < out_dim; ++d) row[d] += elu(sr[d]);
      }
      for (int d = 0; d < out_dim; ++d) row[d] /= heads;
      axpy(1.0, h_in.row(v), row, out_dim);
    }
  }
  return c.out;
}

Matrix encode_nodes(const GatModel& model, const GraphView& view, bool training,
                    std::mt19937_64* rng, GraphCache* cache, bool parallel) {
  GraphCache local;
  GraphCache& c = cache ? *cache : local;
  gat_layer_forward(model.params.layer1, &model.params.residual1, HeadMode::Concat, view,
                    view.h0, model.config.leaky_slope, training, model.config.dropout, rng,
                    &c.l1, parallel);
  gat_layer_forward(model.params.layer2, nullptr, HeadMode::Average, view, c.l1.out,
                    model.config.leaky_slope, training, model.config.dropout, rng, &c.l2,
                    parallel);
  return c.l2.out;
}

std::array<double, 2> classify_pair(const GatModel& model, const Matrix& h, int i, int j,
                                    bool training, std::mt19937_64* rng, PairCache* cache) {
  const MlpParams& mlp = model.params.mlp;
  const int hidden = h.cols;
  const int mh = mlp.w1.cols;
  PairCache local;
  PairCache& c = cache ? *cache : local;
  c.i = i;
  c.j = j;
  c.x.assign(2 * hidden, 0.0);
  std::copy(h.row(i), h.row(i) + hidden, c.x.begin());
  std::copy(h.row(j), h.row(j) + hidden, c.x.begin() + hidden);

  c.z1.assign(mh, 0.0);
  for (int k = 0; k < 2 * hidden; ++k)
    if (c.x[k] != 0.0) axpy(c.x[k], mlp.w1.row(k), c.z1.data(), mh);
  for (int k = 0; k < mh; ++k) c.z1[k] += mlp.b1[k];

  c.a1.assign(mh, 0.0);
  for (int k = 0; k < mh; ++k) c.a1[k] = std::max(c.z1[k], 0.0);

  const bool use_dropout = training && model.config.dropout > 0.0;
  c.mask.clear();
  if (use_dropout) {
    if (rng == nullptr) throw std::runtime_error("classify_pair: dropout requires an RNG");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double keep_scale = 1.0 / (1.0 - model.config.dropout);
    c.mask.assign(mh, 0.0);
    for (int k = 0; k < mh; ++k) {
      c.mask[k] = unit(*rng) < model.config.dropout ? 0.0 : keep_scale;
      c.a1[k] *= c.mask[k];
    }
  }

  double l0 = mlp.b2[0], l1 = mlp.b2[1];
  for (int k = 0; k < mh; ++k) {
    l0 += c.a1[k] * mlp.w2.at(k, 0);
    l1 += c.a1[k] * mlp.w2.at(k, 1);
  }
  c.logits = {l0, l1};
  double mx = std::max(l0, l1);
  double e0 = std::exp(l0 - mx), e1 = std::exp(l1 - mx);
  c.prob = {e0 / (e0 + e1), e1 / (e0 + e1)};
  return c.prob;
}

double focal_loss(const std::array<double, 2>& prob, int label, double alpha_t, double gamma) {
  if (label != 0 && label != 1) throw ValidationError("focal_loss: label must be 0 or 1");
  double p = prob[label];
  double pc = std::max(p, 1e-12);
  return -alpha_t * std::pow(1.0 - p, gamma) * std::log(pc);
}

std::array<double, 2> focal_logit_grad(const std::array<double, 2>& prob, int label,
                                       double alpha_t, double gamma) {
  double p = prob[label];
  double pc = std::max(p, 1e-12);
  double one_minus = 1.0 - p;
  double term1 = 0.0;
  if (gamma > 0.0 && one_minus > 0.0)
    term1 = gamma * std::pow(one_minus, gamma - 1.0) * std::log(pc);
  double term2 = std::pow(one_minus, gamma) / pc;
  double dldp = alpha_t * (term1 - term2);
  std::array<double, 2> g{};
  for (int k = 0; k < 2; ++k) {
    double indicator = k == label ? 1.0 : 0.0;
    g[k] = dldp * p * (indicator - prob[k]);
  }
  return g;
}

BatchResult forward_batch(const GatModel& model, const GraphView& view,
                          const std::vector<BatchPair>& pairs,
                          const std::array<double, 2>& class_weights, bool training,
                          std::mt19937_64* rng, GraphCache* gcache,
                          std::vector<PairCache>* pcaches) {
  GraphCache local;
  GraphCache& gc = gcache ? *gcache : local;
  Matrix h = encode_nodes(model, view, training, rng, &gc, /*parallel=*/!training);
  if (pcaches) pcaches->assign(pairs.size(), PairCache());
  BatchResult result;
  result.prob.resize(pairs.size());
  double sum = 0.0;
  for (size_t k = 0; k < pairs.size(); ++k) {
    PairCache* pc = pcaches ? &(*pcaches)[k] : nullptr;
    result.prob[k] = classify_pair(model, h, pairs[k].i, pairs[k].j, training, rng, pc);
    sum += focal_loss(result.prob[k], pairs[k].label, class_weights[pairs[k].label],
                      model.config.focal_gamma);
  }
  result.mean_loss = pairs.empty() ? 0.0 : sum / static_cast<double>(pairs.size());
  return result;
}

namespace {

// Backward through one GAT layer. d_out is consumed; gradients land in
// grad_layer (+ grad_residual for Concat). Returns d(h_in) unless the input
// gradient is not needed (first layer).
Matrix layer_backward(const LayerParams& layer, const Matrix* residual_proj, HeadMode mode,
                      const GraphView& view, const Matrix& h_in, const LayerCache& c,
                      const Matrix& d_out, double leaky_slope, LayerParams& grad_layer,
                      Matrix* grad_residual, bool need_input_grad) {
  const int heads = static_cast<int>(layer.heads.size());
  const int out_dim = layer.heads[0].weight.cols;
  const int n = view.n;

  Matrix d_in;
  if (need_input_grad) d_in = Matrix(n, h_in.cols);

  // residual path
  if (mode == HeadMode::Concat) {
    if (residual_proj) {
      Matrix& dr = *grad_residual;
      for (int v = 0; v < n; ++v) {
        const double* g = d_out.row(v);
        const double* x = h_in.row(v);
        for (int i = 0; i < h_in.cols; ++i) {
          if (x[i] != 0.0) axpy(x[i], g, dr.row(i), d_out.cols);
          if (need_input_grad) d_in.at(v, i) += dot(residual_proj->row(i), g, d_out.cols);
        }
      }
    } else if (need_input_grad) {
      for (int v = 0; v < n; ++v) axpy(1.0, d_out.row(v), d_in.row(v), d_out.cols);
    }
  } else if (need_input_grad) {
    for (int v = 0; v < n; ++v) axpy(1.0, d_out.row(v), d_in.row(v), d_out.cols);
  }

  std::vector<double> d_summed(out_dim);
  for (int h = 0; h < heads; ++h) {
    const Matrix& w = layer.heads[h].weight;
    const std::vector<double>& a = layer.heads[h].attn;
    const Matrix& s = c.proj[h];
    Matrix ds(n, out_dim);
    std::vector<double> dp(n, 0.0), dq(n, 0.0);
    std::vector<double> d_attn_row;

    for (int v = 0; v < n; ++v) {
      // gradient of this head's ELU output for node v
      const double* g = d_out.row(v);
      const double* sr = c.summed[h].row(v);
      if (mode == HeadMode::Concat) {
        for (int d = 0; d < out_dim; ++d)
          d_summed[d] = g[h * out_dim + d] * elu_grad(sr[d]);
      } else {
        for (int d = 0; d < out_dim; ++d) d_summed[d] = g[d] / heads * elu_grad(sr[d]);
      }

      int b = view.offsets[v], e = view.offsets[v + 1];
      d_attn_row.assign(e - b, 0.0);
      // summed[v] = sum_k used[k] * s[nbr[k]]
      for (int k = b; k < e; ++k) {
        int u = view.nbrs[k];
        d_attn_row[k - b] = dot(d_summed.data(), s.row(u), out_dim);
        axpy(c.attn_used[h][k], d_summed.data(), ds.row(u), out_dim);
      }
      // dropout mask is used/attn elementwise; recover scale without storing it
      for (int k = b; k < e; ++k) {
        double alpha = c.attn[h][k];
        double scale = alpha > 0.0 ? c.attn_used[h][k] / alpha : 0.0;
        d_attn_row[k - b] *= scale;
      }
      // softmax rows
      double inner = 0.0;
      for (int k = b; k < e; ++k) inner += c.attn[h][k] * d_attn_row[k - b];
      for (int k = b; k < e; ++k) {
        double de = c.attn[h][k] * (d_attn_row[k - b] - inner);
        double dpre = c.pre[h][k] > 0.0 ? de : leaky_slope * de;
        dp[v] += dpre;
        dq[view.nbrs[k]] += dpre;
      }
    }

    auto& grad_head = grad_layer.heads[h];
    for (int v = 0; v < n; ++v) {
      if (dp[v] != 0.0) {
        axpy(dp[v], s.row(v), grad_head.attn.data(), out_dim);
        axpy(dp[v], a.data(), ds.row(v), out_dim);
      }
      if (dq[v] != 0.0) {
        axpy(dq[v], s.row(v), grad_head.attn.data() + out_dim, out_dim);
        axpy(dq[v], a.data() + out_dim, ds.row(v), out_dim);
      }
    }

    // s = h_in * w
    for (int v = 0; v < n; ++v) {
      const double* x = h_in.row(v);
      const double* dsr = ds.row(v);
      for (int i = 0; i < h_in.cols; ++i)
        if (x[i] != 0.0) axpy(x[i], dsr, grad_head.weight.row(i), out_dim);
      if (need_input_grad) {
        double* din = d_in.row(v);
        for (int i = 0; i < h_in.cols; ++i) din[i] += dot(w.row(i), dsr, out_dim);
      }
    }
  }
  return d_in;
}

}  // namespace

void backward_batch(const GatModel& model, const GraphView& view, const GraphCache& gcache,
                    const std::vector<PairCache>& pcaches, const std::vector<BatchPair>& pairs,
                    const std::array<double, 2>& class_weights, double scale, ModelParams& grad) {
  const MlpParams& mlp = model.params.mlp;
  const int hidden = model.config.hidden_dim;
  const int mh = mlp.w1.cols;
  Matrix dh2(view.n, hidden);

  for (size_t k = 0; k < pairs.size(); ++k) {
    const PairCache& pc = pcaches[k];
    auto dlogits = focal_logit_grad(pc.prob, pairs[k].label, class_weights[pairs[k].label],
                                    model.config.focal_gamma);
    dlogits[0] *= scale;
    dlogits[1] *= scale;

    std::vector<double> da1(mh, 0.0), dz1(mh, 0.0);
    for (int u = 0; u < mh; ++u) {
      grad.mlp.w2.at(u, 0) += pc.a1[u] * dlogits[0];
      grad.mlp.w2.at(u, 1) += pc.a1[u] * dlogits[1];
      da1[u] = mlp.w2.at(u, 0) * dlogits[0] + mlp.w2.at(u, 1) * dlogits[1];
    }
    grad.mlp.b2[0] += dlogits[0];
    grad.mlp.b2[1] += dlogits[1];

    for (int u = 0; u < mh; ++u) {
      double d = da1[u];
      if (!pc.mask.empty()) d *= pc.mask[u];
      dz1[u] = pc.z1[u] > 0.0 ? d : 0.0;
      grad.mlp.b1[u] += dz1[u];
    }
    for (int i = 0; i < 2 * hidden; ++i)
      if (pc.x[i] != 0.0) axpy(pc.x[i], dz1.data(), grad.mlp.w1.row(i), mh);

    // dx = w1 * dz1, split across the two node embeddings
    double* di = dh2.row(pc.i);
    double* dj = dh2.row(pc.j);
    for (int i = 0; i < hidden; ++i) {
      di[i] += dot(mlp.w1.row(i), dz1.data(), mh);
      dj[i] += dot(mlp.w1.row(i + hidden), dz1.data(), mh);
    }
  }

  Matrix dh1 = layer_backward(model.params.layer2, nullptr, HeadMode::Average, view,
                              gcache.l1.out, gcache.l2, dh2, model.config.leaky_slope,
                              grad.layer2, nullptr, /*need_input_grad=*/true);
  layer_backward(model.params.layer1, &model.params.residual1, HeadMode::Concat, view, view.h0,
                 gcache.l1, dh1, model.config.leaky_slope, grad.layer1, &grad.residual1,
                 /*need_input_grad=*/false);
}

void adam_step(ModelParams& params, const ModelParams& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  auto pt = param_tensors(params);
  auto gt = param_tensors(grad);
  auto mt = param_tensors(state.m);
  auto vt = param_tensors(state.v);
  ++state.step;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (size_t t = 0; t < pt.size(); ++t) {
    auto& p = *pt[t];
    const auto& g = *gt[t];
    auto& m = *mt[t];
    auto& v = *vt[t];
    for (size_t i = 0; i < p.size(); ++i) {
      double gi = g[i];
      if (!std::isfinite(gi))
        throw std::runtime_error("adam: non-finite gradient in tensor " + std::to_string(t) +
                                 " at index " + std::to_string(i));
      m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
      v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

std::array<double, 2> inverse_frequency_weights(const std::vector<TrainPair>& pairs) {
  double n0 = 0.0, n1 = 0.0;
  for (const auto& p : pairs) (p.label == 1 ? n1 : n0) += 1.0;
  if (n0 == 0.0 || n1 == 0.0) return {1.0, 1.0};
  double r0 = 1.0 / (n0 / (n0 + n1));
  double r1 = 1.0 / (n1 / (n0 + n1));
  return {2.0 * r0 / (r0 + r1), 2.0 * r1 / (r0 + r1)};
}

namespace {

struct GroupedPairs {
  std::vector<int> graphs;                           // distinct graph ids, ascending
  std::vector<std::vector<BatchPair>> pairs;         // aligned with graphs
};

GroupedPairs group_by_graph(const std::vector<TrainPair>& pairs, const std::vector<size_t>& idx) {
  GroupedPairs g;
  std::vector<size_t> order(idx);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return pairs[a].graph < pairs[b].graph; });
  for (size_t k : order) {
    const TrainPair& p = pairs[k];
    if (g.graphs.empty() || g.graphs.back() != p.graph) {
      g.graphs.push_back(p.graph);
      g.pairs.emplace_back();
    }
    g.pairs.back().push_back({p.i, p.j, p.label});
  }
  return g;
}

}  // namespace

TrainResult train_model(const ModelConfig& config, const std::vector<GraphView>& views,
                        const std::vector<TrainPair>& train_pairs,
                        const std::vector<TrainPair>& val_pairs, uint64_t seed) {
  config.validate();
  if (train_pairs.empty()) throw ConfigError("train: no training pairs");
  if (val_pairs.empty()) throw ConfigError("train: no validation pairs");
  for (const auto& p : train_pairs)
    if (p.graph < 0 || p.graph >= static_cast<int>(views.size()))
      throw ValidationError("train: pair references an unknown graph");

  TrainResult result;
  result.class_weights =
      config.class_weighting ? inverse_frequency_weights(train_pairs) : std::array<double, 2>{1.0, 1.0};
  GatModel model = init_model(config, seed);
  std::mt19937_64 rng(seed ^ 0x517cc1b727220a95ULL);

  AdamState adam{zero_params(config), zero_params(config), 0};
  ModelParams grad = zero_params(config);
  ModelParams best = model.params;
  double best_val = std::numeric_limits<double>::infinity();
  int streak = 0;

  std::vector<size_t> all_val(val_pairs.size());
  std::iota(all_val.begin(), all_val.end(), size_t{0});
  GroupedPairs val_groups = group_by_graph(val_pairs, all_val);

  std::vector<size_t> order(train_pairs.size());
  std::iota(order.begin(), order.end(), size_t{0});

  GraphCache gcache;
  std::vector<PairCache> pcaches;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<size_t> batch(order.begin() + start, order.begin() + stop);
      GroupedPairs groups = group_by_graph(train_pairs, batch);
      auto zero = param_tensors(grad);
      for (auto* t : zero) std::fill(t->begin(), t->end(), 0.0);
      double scale = 1.0 / static_cast<double>(batch.size());
      for (size_t gi = 0; gi < groups.graphs.size(); ++gi) {
        const GraphView& view = views[groups.graphs[gi]];
        BatchResult res = forward_batch(model, view, groups.pairs[gi], result.class_weights,
                                        /*training=*/true, &rng, &gcache, &pcaches);
        loss_sum += res.mean_loss * static_cast<double>(groups.pairs[gi].size());
        backward_batch(model, view, gcache, pcaches, groups.pairs[gi], result.class_weights,
                       scale, grad);
      }
      adam_step(model.params, grad, adam, config.learning_rate);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(train_pairs.size());

    double val_sum = 0.0;
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(val_pairs.size());
    labels.reserve(val_pairs.size());
    for (size_t gi = 0; gi < val_groups.graphs.size(); ++gi) {
      const GraphView& view = views[val_groups.graphs[gi]];
      BatchResult res = forward_batch(model, view, val_groups.pairs[gi], result.class_weights,
                                      /*training=*/false, nullptr, &gcache, nullptr);
      val_sum += res.mean_loss * static_cast<double>(val_groups.pairs[gi].size());
      for (size_t k = 0; k < val_groups.pairs[gi].size(); ++k) {
        scores.push_back(res.prob[k][1]);
        labels.push_back(val_groups.pairs[gi][k].label);
      }
    }
    stats.val_loss = val_sum / static_cast<double>(val_pairs.size());
    try {
      stats.val_auc = roc_auc(scores, labels);
    } catch (const ValidationError&) {
      stats.val_auc = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.push_back(stats);

    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      best = model.params;
      result.best_epoch = epoch;
      streak = 0;
    } else {
      ++streak;
      if (streak > config.patience) break;
    }
  }

  model.params = best;
  result.model = std::move(model);
  return result;
}

std::vector<PredictedLink> predict_links(const GatModel& model, const GraphView& view,
                                         const std::vector<CandidatePair>& pairs,
                                         double threshold) {
  Matrix h = encode_nodes(model, view, /*training=*/false, nullptr, nullptr, /*parallel=*/true);
  std::vector<PredictedLink> out;
  for (const auto& p : pairs) {
    auto prob = classify_pair(model, h, p.a, p.b, /*training=*/false, nullptr, nullptr);
    if (prob[1] >= threshold) out.push_back({p.a, p.b, prob[1]});
  }
  return out;
}

}  // namespace stc
