#include "semisup/metrics.hpp"

#include <nlohmann/json.hpp>

namespace semisup {

namespace {
using Json = nlohmann::ordered_json;
}

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truth,
                          int classes) {
  require_valid(preds.size() == truth.size(), "confusion: preds/truth length mismatch");
  require_valid(classes >= 1, "confusion: classes must be >= 1");
  ConfusionMatrix cm = ConfusionMatrix::Zero(classes, classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require_valid(truth[i] >= 0 && truth[i] < classes, "confusion: truth label out of range");
    require_valid(preds[i] >= 0 && preds[i] < classes, "confusion: prediction out of range");
    cm(truth[i], preds[i]) += 1;
  }
  return cm;
}

MetricsReport macro_f1(const ConfusionMatrix& cm) {
  require_valid(cm.rows() == cm.cols() && cm.rows() >= 1, "macro_f1: matrix must be square");
  require_valid((cm.array() >= 0).all(), "macro_f1: counts must be nonnegative");
  const int k = static_cast<int>(cm.rows());
  MetricsReport r;
  r.per_class_f1 = Vector::Zero(k);
  r.precision = Vector::Zero(k);
  r.recall = Vector::Zero(k);
  r.support.resize(k);
  for (int c = 0; c < k; ++c) {
    const auto tp = cm(c, c);
    const auto predicted = cm.col(c).sum();  // tp + fp
    const auto actual = cm.row(c).sum();     // tp + fn
    r.support[c] = actual;
    r.precision(c) = predicted == 0 ? 0.0 : double(tp) / double(predicted);
    r.recall(c) = actual == 0 ? 0.0 : double(tp) / double(actual);
    const double pr = r.precision(c) + r.recall(c);
    r.per_class_f1(c) = pr == 0.0 ? 0.0 : 2.0 * r.precision(c) * r.recall(c) / pr;
  }
  // sequential sum in class order; keeps brute-force comparisons exact
  double sum = 0.0;
  for (int c = 0; c < k; ++c) sum += r.per_class_f1(c);
  r.macro_f1 = sum / double(k);
  return r;
}

std::string metrics_to_json(const MetricsReport& report) {
  Json j;
  j["per_class_f1"] = std::vector<double>(report.per_class_f1.data(),
                                          report.per_class_f1.data() + report.per_class_f1.size());
  j["macro_f1"] = report.macro_f1;
  j["precision"] = std::vector<double>(report.precision.data(),
                                       report.precision.data() + report.precision.size());
  j["recall"] =
      std::vector<double>(report.recall.data(), report.recall.data() + report.recall.size());
  j["support"] = report.support;
  return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& json_text) {
  Json j = Json::parse(json_text);
  MetricsReport r;
  const auto f1 = j.at("per_class_f1").get<std::vector<double>>();
  const auto prec = j.at("precision").get<std::vector<double>>();
  const auto rec = j.at("recall").get<std::vector<double>>();
  r.per_class_f1 = Eigen::Map<const Vector>(f1.data(), f1.size());
  r.precision = Eigen::Map<const Vector>(prec.data(), prec.size());
  r.recall = Eigen::Map<const Vector>(rec.data(), rec.size());
  r.support = j.at("support").get<std::vector<std::int64_t>>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  return r;
}

}  // namespace semisup
