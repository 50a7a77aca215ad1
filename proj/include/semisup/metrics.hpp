#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semisup/types.hpp"

namespace semisup {

// Entry (true class, predicted class).
using ConfusionMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct MetricsReport {
  Vector per_class_f1;
  Vector precision;
  Vector recall;
  std::vector<std::int64_t> support;  // actual samples per class
  double macro_f1 = 0.0;
};

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truth,
                          int classes);

// Per-class one-vs-rest precision/recall/F1; any 0/0 is defined as 0.
MetricsReport macro_f1(const ConfusionMatrix& cm);

// Fixed field names: per_class_f1, macro_f1, precision, recall, support.
std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& json_text);

}  // namespace semisup
