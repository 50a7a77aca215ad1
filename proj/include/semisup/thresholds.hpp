#pragma once

#include <vector>

#include "semisup/data.hpp"
#include "semisup/net.hpp"
#include "semisup/types.hpp"

namespace semisup {

// Per-class confidence thresholds, recomputed each epoch from the teacher's
// mean confidence on correctly predicted labeled samples and smoothed with
// momentum mu across epochs.
struct ThresholdState {
  Vector tau;  // K entries, each in [0,1]
  double mu = 0.9;
  int epoch = 0;

  int classes() const { return static_cast<int>(tau.size()); }
};

ThresholdState make_thresholds(int classes, double initial, double mu);

struct ClassConfidenceStats {
  std::vector<long long> correct_count;  // N_c
  Vector confidence_sum;                 // sum of the correct-class confidence

  int classes() const { return static_cast<int>(correct_count.size()); }
  bool defined(int c) const { return correct_count[c] > 0; }
  double mean(int c) const { return confidence_sum(c) / double(correct_count[c]); }
};

// Teacher inference on raw (un-augmented) labeled inputs.
Matrix teacher_predict(const ModelParams& teacher, const Dataset& labeled);

// A sample counts for class c iff its true label is c and the argmax
// prediction is c; its contribution is the predicted probability of c.
ClassConfidenceStats class_confidences(const Matrix& preds, const std::vector<int>& labels);

// tau_c <- tau_c + (1 - mu) * (mean_c - tau_c) for classes with N_c > 0,
// clamped to [0,1]; classes with N_c = 0 carry the previous threshold
// forward. Increments epoch.
ThresholdState update_thresholds(const ThresholdState& state,
                                 const ClassConfidenceStats& stats);

}  // namespace semisup
