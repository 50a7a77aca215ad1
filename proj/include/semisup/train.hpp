#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "semisup/data.hpp"
#include "semisup/net.hpp"
#include "semisup/thresholds.hpp"
#include "semisup/types.hpp"

namespace semisup {

// What the unlabeled loss trains against for accepted samples: the strong
// view against the stop-gradient pseudo-label (default), or the literal
// averaged distribution with gradient flowing through both views.
enum class UnlabeledLossTarget { kStrongView, kAveraged };

struct TrainConfig {
  double lambda1 = 1.0;
  double lambda2 = 0.8;
  int labeled_batch = 32;
  int unlabeled_batch = 32;
  int steps_per_epoch = 200;
  int epochs = 15;
  double mu = 0.9;
  double ema_decay = 0.999;
  std::uint64_t seed = 1;
  int hidden_units = 256;
  double learning_rate = 5e-4;
  UnlabeledLossTarget unlabeled_loss_target = UnlabeledLossTarget::kStrongView;
  // Mechanism switches driven by the experiment variant.
  bool use_unlabeled = true;
  bool dtm_update = true;
  double initial_threshold = -1.0;  // < 0 means 1/K
  AugmentConfig augment;
};

void validate(const TrainConfig& config);

struct PseudoLabelBatch {
  Matrix weak_inputs;   // augmented views fed to the network
  Matrix strong_inputs;
  Matrix weak_probs;
  Matrix strong_probs;
  Matrix avg_probs;             // (weak + strong) / 2
  std::vector<int> labels;      // argmax of avg_probs, smallest-index ties
  Vector confidence;            // max of avg_probs
  std::vector<bool> accepted;   // confidence >= tau of the pseudo class

  Eigen::Index size() const { return avg_probs.rows(); }
  long accepted_count() const;
};

// Pure averaging + gating step from the two view distributions.
PseudoLabelBatch make_pseudo_labels(const Matrix& weak_probs, const Matrix& strong_probs,
                                    const ThresholdState& thresholds);

// Weak/strong augment the batch (weak rows first, then strong rows), run the
// student on both views, then gate.
PseudoLabelBatch pseudo_label(const ModelParams& student, const Matrix& unlabeled_inputs,
                              const ThresholdState& thresholds, const AugmentConfig& augment,
                              Rng& rng);

// Student probabilities on a weakly augmented labeled batch.
Matrix predict_labeled(const ModelParams& student, const Matrix& batch_inputs,
                       const AugmentConfig& augment, Rng& rng);

// labeled: mean CE of labeled_probs against the true labels; unlabeled: mean
// CE over accepted samples only (0 when none), on the configured target.
LossBreakdown combined_loss(const Matrix& labeled_probs, const std::vector<int>& labeled_y,
                            const PseudoLabelBatch& pseudo, const TrainConfig& config);

struct StepGradients {
  LossBreakdown loss;
  ModelParams grads;
};

// Loss and parameter gradients for one optimization step. The acceptance set
// and pseudo-labels are frozen (stop-gradient); gradient flows through the
// configured unlabeled target only, and only for accepted samples.
StepGradients training_objective(const ModelParams& student, const Matrix& labeled_inputs,
                                 const std::vector<int>& labeled_y,
                                 const PseudoLabelBatch& pseudo, const TrainConfig& config);

struct EpochReport {
  int epoch = 0;
  int steps = 0;
  LossBreakdown mean_loss;
  double accepted_fraction = 0.0;
  std::vector<long long> per_class_accepted;
  Vector thresholds;                     // snapshot after this epoch's update
  Vector stats_mean;                     // per-class teacher confidence mean; NaN when N_c = 0
  std::vector<long long> stats_count;    // N_c
  double heldout_macro_f1 = 0.0;
  double pseudo_label_accuracy = 0.0;    // over accepted samples; 0 when none
};

struct Pools {
  Dataset labeled;                   // already balanced
  Dataset unlabeled;
  std::vector<int> unlabeled_truth;  // optional diagnostics; may be empty
  Dataset heldout;
};

struct TrainState {
  ModelParams student;
  ModelParams teacher;
  AdamState optimizer;
  ThresholdState thresholds;
  Rng labeled_rng;    // labeled sampling + weak augment
  Rng unlabeled_rng;  // unlabeled sampling + both augments
  int epoch = 0;
};

// Streams: tag 0 -> init, 1 -> labeled, 2 -> unlabeled. Keeping the labeled
// and unlabeled draws on separate streams makes a lambda2 = 0 run match a
// supervised-only run parameter-for-parameter.
TrainState init_train_state(const TrainConfig& config, int dim, int classes);

// steps_per_epoch optimization steps, then the per-epoch threshold update
// from the teacher, then a held-out evaluation.
EpochReport train_epoch(TrainState& state, const Pools& pools, const TrainConfig& config);

std::pair<TrainState, std::vector<EpochReport>> train_run(const TrainConfig& config,
                                                          const Pools& pools);

// Argmax class predictions for a dataset under the given parameters.
std::vector<int> predict_classes(const ModelParams& params, const Matrix& inputs);

}  // namespace semisup
