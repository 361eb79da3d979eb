#include "stcausal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace stc {

using ordered_json = nlohmann::ordered_json;

Confusion confusion(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw ValidationError("confusion: " + std::to_string(predictions.size()) +
                          " predictions vs " + std::to_string(labels.size()) + " labels");
  Confusion c;
  for (size_t i = 0; i < predictions.size(); ++i) {
    int p = predictions[i], y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1))
      throw ValidationError("confusion: entries must be 0 or 1");
    if (p == 1 && y == 1)
      ++c.tp;
    else if (p == 1 && y == 0)
      ++c.fp;
    else if (p == 0 && y == 0)
      ++c.tn;
    else
      ++c.fn;
  }
  return c;
}

Prf1 prf1(const Confusion& c) {
  Prf1 r;
  if (c.tp + c.fp > 0)
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  else
    r.degenerate_precision = true;
  if (c.tp + c.fn > 0)
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  else
    r.degenerate_recall = true;
  if (r.precision + r.recall > 0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  else
    r.degenerate_f1 = true;
  return r;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw ValidationError("roc_auc: scores and labels differ in length");
  int64_t n_pos = 0, n_neg = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("roc_auc: labels must be 0 or 1");
    (y == 1 ? n_pos : n_neg)++;
  }
  if (n_pos == 0 || n_neg == 0)
    throw ValidationError("roc_auc: undefined, labels contain a single class");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // average ranks within tied groups, ranks are 1-based
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
    i = j;
  }
  double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

EvalReport evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                    double threshold) {
  std::vector<int> pred(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] >= threshold ? 1 : 0;
  EvalReport r;
  r.counts = confusion(pred, labels);
  int64_t total = r.counts.tp + r.counts.fp + r.counts.tn + r.counts.fn;
  r.accuracy = total > 0 ? static_cast<double>(r.counts.tp + r.counts.tn) / total : 0.0;
  Prf1 p = prf1(r.counts);
  r.precision = p.precision;
  r.recall = p.recall;
  r.f1 = p.f1;
  r.degenerate_precision = p.degenerate_precision;
  r.degenerate_recall = p.degenerate_recall;
  r.degenerate_f1 = p.degenerate_f1;
  try {
    r.auc = roc_auc(scores, labels);
    r.auc_defined = true;
  } catch (const ValidationError&) {
    r.auc = 0.0;
    r.auc_defined = false;
  }
  return r;
}

std::string report_json(const EvalReport& r) {
  ordered_json j;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  if (r.auc_defined)
    j["auc"] = r.auc;
  else
    j["auc"] = nullptr;
  j["auc_defined"] = r.auc_defined;
  j["degenerate_precision"] = r.degenerate_precision;
  j["degenerate_recall"] = r.degenerate_recall;
  j["degenerate_f1"] = r.degenerate_f1;
  j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn},
                 {"fn", r.counts.fn}};
  return j.dump(2);
}

std::string curves_csv(const std::vector<EpochStats>& history) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,val_auc\n";
  char buf[96];
  for (size_t e = 0; e < history.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", e + 1, history[e].train_loss,
                  history[e].val_loss, history[e].val_auc);
    out << buf;
  }
  return out.str();
}

}  // namespace stc
