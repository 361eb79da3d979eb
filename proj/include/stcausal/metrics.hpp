#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stcausal/errors.hpp"

namespace stc {

struct Confusion {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

Confusion confusion(const std::vector<int>& predictions, const std::vector<int>& labels);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // set when the corresponding denominator was zero and the value was defined as 0
  bool degenerate_precision = false;
  bool degenerate_recall = false;
  bool degenerate_f1 = false;
};

Prf1 prf1(const Confusion& c);

// Mann-Whitney rank statistic with tie averaging: P(s+ > s-) + 0.5 * P(s+ = s-).
// Throws ValidationError when labels contain a single class.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;      // meaningful only when auc_defined
  bool auc_defined = false;
  bool degenerate_precision = false;
  bool degenerate_recall = false;
  bool degenerate_f1 = false;
  Confusion counts;
};

EvalReport evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                    double threshold);

std::string report_json(const EvalReport& report);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_auc = 0.0;
};

// Header "epoch,train_loss,val_loss,val_auc"; values round-trip through text.
std::string curves_csv(const std::vector<EpochStats>& history);

}  // namespace stc
