#include "semisup/thresholds.hpp"

#include <algorithm>

namespace semisup {

ThresholdState make_thresholds(int classes, double initial, double mu) {
  require_config(classes >= 1, "thresholds need at least one class");
  require_config(initial >= 0.0 && initial <= 1.0, "initial threshold outside [0,1]");
  require_config(mu >= 0.0 && mu <= 1.0, "mu outside [0,1]");
  ThresholdState st;
  st.tau = Vector::Constant(classes, initial);
  st.mu = mu;
  return st;
}

Matrix teacher_predict(const ModelParams& teacher, const Dataset& labeled) {
  require_dims(labeled.size() > 0, "teacher_predict: empty dataset");
  return forward_softmax(teacher, labeled.features);
}

ClassConfidenceStats class_confidences(const Matrix& preds, const std::vector<int>& labels) {
  require_dims(static_cast<std::size_t>(preds.rows()) == labels.size(),
               "class_confidences: preds/labels length mismatch");
  const int k = static_cast<int>(preds.cols());
  ClassConfidenceStats stats;
  stats.correct_count.assign(k, 0);
  stats.confidence_sum = Vector::Zero(k);
  for (Eigen::Index i = 0; i < preds.rows(); ++i) {
    const int truth = labels[i];
    require_valid(truth >= 0 && truth < k, "class_confidences: label out of range");
    if (argmax_row(preds, i) == truth) {
      stats.correct_count[truth] += 1;
      stats.confidence_sum(truth) += preds(i, truth);
    }
  }
  return stats;
}

ThresholdState update_thresholds(const ThresholdState& state,
                                 const ClassConfidenceStats& stats) {
  require_dims(stats.classes() == state.classes(),
               "update_thresholds: class count mismatch");
  ThresholdState next = state;
  for (int c = 0; c < state.classes(); ++c) {
    if (!stats.defined(c)) continue;  // carry the previous threshold forward
    const double tau = state.tau(c);
    const double delta = (1.0 - state.mu) * (stats.mean(c) - tau);
    double updated = std::clamp(tau + delta, 0.0, 1.0);
    // The realized step must never exceed (1-mu)|mean - tau|, even after the
    // sum rounds; pull back by ulps until it holds.
    while (std::abs(updated - tau) > std::abs(delta))
      updated = std::nextafter(updated, tau);
    next.tau(c) = updated;
  }
  next.epoch = state.epoch + 1;
  return next;
}

}  // namespace semisup
