#include "semisup/train.hpp"

#include <cmath>
#include <limits>

#include "semisup/metrics.hpp"

namespace semisup {

void validate(const TrainConfig& config) {
  require_config(config.lambda1 >= 0.0 && config.lambda2 >= 0.0,
                 "lambda1 and lambda2 must be >= 0");
  require_config(config.mu >= 0.0 && config.mu <= 1.0, "mu must be in [0,1]");
  require_config(config.ema_decay >= 0.0 && config.ema_decay <= 1.0,
                 "ema_decay must be in [0,1]");
  require_config(config.labeled_batch >= 1 && config.unlabeled_batch >= 1,
                 "batch sizes must be >= 1");
  require_config(config.steps_per_epoch >= 0, "steps_per_epoch must be >= 0");
  require_config(config.epochs >= 0, "epochs must be >= 0");
  require_config(config.hidden_units >= 1, "hidden_units must be >= 1");
  require_config(config.learning_rate > 0.0, "learning_rate must be > 0");
  validate(config.augment);
}

long PseudoLabelBatch::accepted_count() const {
  long n = 0;
  for (bool a : accepted) n += a;
  return n;
}

PseudoLabelBatch make_pseudo_labels(const Matrix& weak_probs, const Matrix& strong_probs,
                                    const ThresholdState& thresholds) {
  require_dims(weak_probs.rows() == strong_probs.rows() &&
                   weak_probs.cols() == strong_probs.cols(),
               "make_pseudo_labels: view shapes differ");
  require_dims(weak_probs.cols() == thresholds.classes(),
               "make_pseudo_labels: thresholds have wrong class count");
  PseudoLabelBatch b;
  b.weak_probs = weak_probs;
  b.strong_probs = strong_probs;
  b.avg_probs = 0.5 * (weak_probs + strong_probs);
  b.labels = argmax_rows(b.avg_probs);
  b.confidence = Vector(b.avg_probs.rows());
  b.accepted.resize(static_cast<std::size_t>(b.avg_probs.rows()));
  for (Eigen::Index i = 0; i < b.avg_probs.rows(); ++i) {
    b.confidence(i) = b.avg_probs(i, b.labels[i]);
    b.accepted[i] = b.confidence(i) >= thresholds.tau(b.labels[i]);
  }
  return b;
}

PseudoLabelBatch pseudo_label(const ModelParams& student, const Matrix& unlabeled_inputs,
                              const ThresholdState& thresholds, const AugmentConfig& augment,
                              Rng& rng) {
  Matrix weak = weak_augment_batch(unlabeled_inputs, augment, rng);
  Matrix strong = strong_augment_batch(unlabeled_inputs, augment, rng);
  PseudoLabelBatch b = make_pseudo_labels(forward_softmax(student, weak),
                                          forward_softmax(student, strong), thresholds);
  b.weak_inputs = std::move(weak);
  b.strong_inputs = std::move(strong);
  return b;
}

Matrix predict_labeled(const ModelParams& student, const Matrix& batch_inputs,
                       const AugmentConfig& augment, Rng& rng) {
  return forward_softmax(student, weak_augment_batch(batch_inputs, augment, rng));
}

namespace {

// Mean CE over accepted samples on the configured target distribution.
double unlabeled_loss_value(const PseudoLabelBatch& pseudo, UnlabeledLossTarget target) {
  const long accepted = pseudo.accepted_count();
  if (accepted == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pseudo.size(); ++i) {
    if (!pseudo.accepted[i]) continue;
    const int y = pseudo.labels[i];
    const double p = target == UnlabeledLossTarget::kStrongView ? pseudo.strong_probs(i, y)
                                                                : pseudo.avg_probs(i, y);
    sum -= std::log(std::max(p, kLogFloor));
  }
  return sum / double(accepted);
}

Matrix select_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

}  // namespace

LossBreakdown combined_loss(const Matrix& labeled_probs, const std::vector<int>& labeled_y,
                            const PseudoLabelBatch& pseudo, const TrainConfig& config) {
  LossBreakdown loss;
  loss.labeled = cross_entropy(labeled_probs, one_hot(labeled_y, int(labeled_probs.cols())));
  loss.unlabeled = unlabeled_loss_value(pseudo, config.unlabeled_loss_target);
  loss.total = config.lambda1 * loss.labeled + config.lambda2 * loss.unlabeled;
  return loss;
}

StepGradients training_objective(const ModelParams& student, const Matrix& labeled_inputs,
                                 const std::vector<int>& labeled_y,
                                 const PseudoLabelBatch& pseudo, const TrainConfig& config) {
  const int k = static_cast<int>(student.class_count());
  const Matrix targets = one_hot(labeled_y, k);
  const ForwardCache cache = forward_cached(student, labeled_inputs);

  StepGradients step;
  step.loss.labeled = cross_entropy(cache.probs, targets);
  step.loss.unlabeled = unlabeled_loss_value(pseudo, config.unlabeled_loss_target);
  step.loss.total = config.lambda1 * step.loss.labeled + config.lambda2 * step.loss.unlabeled;

  Matrix dlogits = (cache.probs - targets) / double(labeled_inputs.rows());
  step.grads = backward_from_dlogits(student, labeled_inputs, cache, dlogits);
  if (config.lambda1 != 1.0)
    for (auto field : kParamFields) (step.grads.*field) *= config.lambda1;

  std::vector<Eigen::Index> acc;
  for (Eigen::Index i = 0; i < pseudo.size(); ++i)
    if (pseudo.accepted[i]) acc.push_back(i);
  if (config.lambda2 == 0.0 || acc.empty()) return step;

  const auto n_acc = static_cast<double>(acc.size());
  std::vector<int> acc_labels;
  for (Eigen::Index i : acc) acc_labels.push_back(pseudo.labels[i]);
  const Matrix strong = select_rows(pseudo.strong_inputs, acc);

  if (config.unlabeled_loss_target == UnlabeledLossTarget::kStrongView) {
    const ModelParams gu = backward(student, strong, one_hot(acc_labels, k));
    add_scaled(step.grads, config.lambda2, gu);
    return step;
  }

  // Averaged target: dL/davg = -1 / (n_acc * avg_p) at the pseudo class, and
  // each view receives half of it.
  const Matrix weak = select_rows(pseudo.weak_inputs, acc);
  Matrix dview = Matrix::Zero(static_cast<Eigen::Index>(acc.size()), k);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const int y = acc_labels[i];
    const double avg_p = std::max(pseudo.avg_probs(acc[i], y), kLogFloor);
    dview(static_cast<Eigen::Index>(i), y) = -0.5 / (n_acc * avg_p);
  }
  ModelParams gu = backward_probs(student, weak, dview);
  add_scaled(gu, 1.0, backward_probs(student, strong, dview));
  add_scaled(step.grads, config.lambda2, gu);
  return step;
}

TrainState init_train_state(const TrainConfig& config, int dim, int classes) {
  validate(config);
  require_config(classes >= 2, "training needs at least 2 classes");
  Rng init_rng = Rng::stream(config.seed, 0);
  TrainState st{
      .student = init_params(dim, config.hidden_units, classes, init_rng),
      .teacher = {},
      .optimizer = {},
      .thresholds = {},
      .labeled_rng = Rng::stream(config.seed, 1),
      .unlabeled_rng = Rng::stream(config.seed, 2),
      .epoch = 0,
  };
  st.teacher = st.student;
  st.optimizer = make_adam(st.student, config.learning_rate);
  const double tau0 = config.initial_threshold < 0.0 ? 1.0 / double(classes)
                                                     : config.initial_threshold;
  st.thresholds = make_thresholds(classes, tau0, config.mu);
  return st;
}

namespace {

double evaluate_macro_f1(const ModelParams& params, const Dataset& heldout) {
  const std::vector<int> preds = predict_classes(params, heldout.features);
  return macro_f1(confusion(preds, heldout.labels, heldout.class_count)).macro_f1;
}

}  // namespace

std::vector<int> predict_classes(const ModelParams& params, const Matrix& inputs) {
  return argmax_rows(forward_softmax(params, inputs));
}

EpochReport train_epoch(TrainState& state, const Pools& pools, const TrainConfig& config) {
  validate(config);
  require_config(pools.labeled.has_labels() && pools.labeled.size() > 0,
                 "train_epoch: labeled pool is empty");
  const int k = pools.labeled.class_count;
  require_dims(state.thresholds.classes() == k, "train_epoch: threshold class mismatch");
  if (config.use_unlabeled)
    require_config(pools.unlabeled.size() > 0, "train_epoch: unlabeled pool is empty");

  const int per_class = std::max(1, config.labeled_batch / k);

  EpochReport report;
  report.epoch = state.epoch;
  report.steps = config.steps_per_epoch;
  report.per_class_accepted.assign(k, 0);

  double loss_l_sum = 0.0, loss_u_sum = 0.0;
  long long accepted_total = 0, correct_accepted = 0, unlabeled_seen = 0;

  for (int step = 0; step < config.steps_per_epoch; ++step) {
    Dataset batch = balanced_sample(pools.labeled, per_class, state.labeled_rng);
    Matrix labeled_aug = weak_augment_batch(batch.features, config.augment, state.labeled_rng);

    PseudoLabelBatch pseudo;
    std::vector<Eigen::Index> picks;
    if (config.use_unlabeled) {
      Matrix unlabeled_batch(config.unlabeled_batch, pools.unlabeled.dim());
      for (int i = 0; i < config.unlabeled_batch; ++i) {
        const auto pick = static_cast<Eigen::Index>(
            state.unlabeled_rng.bounded(static_cast<std::uint64_t>(pools.unlabeled.size())));
        picks.push_back(pick);
        unlabeled_batch.row(i) = pools.unlabeled.features.row(pick);
      }
      pseudo = pseudo_label(state.student, unlabeled_batch, state.thresholds, config.augment,
                            state.unlabeled_rng);
      unlabeled_seen += config.unlabeled_batch;
      for (Eigen::Index i = 0; i < pseudo.size(); ++i) {
        if (!pseudo.accepted[i]) continue;
        accepted_total += 1;
        report.per_class_accepted[pseudo.labels[i]] += 1;
        if (!pools.unlabeled_truth.empty() &&
            pseudo.labels[i] == pools.unlabeled_truth[picks[i]])
          correct_accepted += 1;
      }
    } else {
      pseudo.avg_probs = Matrix::Zero(0, k);
      pseudo.strong_probs = pseudo.avg_probs;
      pseudo.weak_probs = pseudo.avg_probs;
    }

    StepGradients step_result =
        training_objective(state.student, labeled_aug, batch.labels, pseudo, config);
    loss_l_sum += step_result.loss.labeled;
    loss_u_sum += step_result.loss.unlabeled;

    adam_step(state.student, step_result.grads, state.optimizer);
    ema_update(state.teacher, state.student, config.ema_decay);
  }

  if (config.steps_per_epoch > 0) {
    report.mean_loss.labeled = loss_l_sum / config.steps_per_epoch;
    report.mean_loss.unlabeled = loss_u_sum / config.steps_per_epoch;
    report.mean_loss.total = config.lambda1 * report.mean_loss.labeled +
                             config.lambda2 * report.mean_loss.unlabeled;
  }
  report.accepted_fraction =
      unlabeled_seen == 0 ? 0.0 : double(accepted_total) / double(unlabeled_seen);
  report.pseudo_label_accuracy =
      accepted_total == 0 ? 0.0 : double(correct_accepted) / double(accepted_total);

  // Per-epoch threshold refresh from the teacher on the raw labeled pool.
  const ClassConfidenceStats stats =
      class_confidences(teacher_predict(state.teacher, pools.labeled), pools.labeled.labels);
  report.stats_mean = Vector::Constant(k, std::numeric_limits<double>::quiet_NaN());
  report.stats_count.assign(k, 0);
  for (int c = 0; c < k; ++c) {
    report.stats_count[c] = stats.correct_count[c];
    if (stats.defined(c)) report.stats_mean(c) = stats.mean(c);
  }
  if (config.dtm_update) {
    state.thresholds = update_thresholds(state.thresholds, stats);
  } else {
    state.thresholds.epoch += 1;
  }
  report.thresholds = state.thresholds.tau;

  report.heldout_macro_f1 = evaluate_macro_f1(state.student, pools.heldout);

  state.epoch += 1;
  return report;
}

std::pair<TrainState, std::vector<EpochReport>> train_run(const TrainConfig& config,
                                                          const Pools& pools) {
  validate(config);
  require_config(pools.labeled.has_labels() && pools.labeled.size() > 0,
                 "train_run: labeled pool is empty");
  require_config(pools.heldout.has_labels() && pools.heldout.size() > 0,
                 "train_run: held-out pool is empty");
  TrainState state = init_train_state(config, static_cast<int>(pools.labeled.dim()),
                                      pools.labeled.class_count);
  std::vector<EpochReport> reports;
  reports.reserve(config.epochs);
  for (int epoch = 0; epoch < config.epochs; ++epoch)
    reports.push_back(train_epoch(state, pools, config));
  return {std::move(state), std::move(reports)};
}

}  // namespace semisup
