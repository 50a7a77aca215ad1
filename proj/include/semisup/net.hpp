#pragma once

#include <array>
#include <vector>

#include "semisup/rng.hpp"
#include "semisup/types.hpp"

namespace semisup {

// Two-layer classifier: input -> hidden (ReLU) -> logits. One instance plays
// the student, a second parameter-averaged copy plays the teacher.
struct ModelParams {
  Matrix w1;  // d x h
  Matrix b1;  // 1 x h
  Matrix w2;  // h x K
  Matrix b2;  // 1 x K

  Eigen::Index input_dim() const { return w1.rows(); }
  Eigen::Index hidden_dim() const { return w1.cols(); }
  Eigen::Index class_count() const { return w2.cols(); }
};

inline constexpr std::array<Matrix ModelParams::*, 4> kParamFields = {
    &ModelParams::w1, &ModelParams::b1, &ModelParams::w2, &ModelParams::b2};

ModelParams zero_params(Eigen::Index dim, Eigen::Index hidden, Eigen::Index classes);

// Uniform init in +-sqrt(6 / (fan_in + fan_out)) per weight matrix, zero
// biases. Entries drawn in row-major order, w1 before w2.
ModelParams init_params(Eigen::Index dim, Eigen::Index hidden, Eigen::Index classes, Rng& rng);

bool same_shape(const ModelParams& a, const ModelParams& b);

struct AdamState {
  ModelParams first_moment;
  ModelParams second_moment;
  long step = 0;
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam(const ModelParams& shape, double lr = 5e-4);

struct LossBreakdown {
  double labeled = 0.0;
  double unlabeled = 0.0;
  double total = 0.0;  // lambda1 * labeled + lambda2 * unlabeled
};

// Probabilities below this floor are clamped before any log.
inline constexpr double kLogFloor = 1e-12;

template <typename Derived>
Mat<typename Derived::Scalar> relu(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return x.derived().array().max(S(0)).matrix();
}

// Row-wise softmax, stabilized by per-row max subtraction.
template <typename Derived>
Mat<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using S = typename Derived::Scalar;
  Mat<S> z = logits.derived();
  Vec<S> row_max = z.rowwise().maxCoeff();
  z.colwise() -= row_max;
  Mat<S> e = z.array().exp().matrix();
  Vec<S> row_sum = e.rowwise().sum();
  return (e.array().colwise() / row_sum.array()).matrix();
}

// Mean over the batch of -sum_j y_ij log(max(p_ij, kLogFloor)).
template <typename DerivedP, typename DerivedY>
double cross_entropy(const Eigen::MatrixBase<DerivedP>& probs,
                     const Eigen::MatrixBase<DerivedY>& targets) {
  require_dims(probs.rows() == targets.rows() && probs.cols() == targets.cols(),
               "cross_entropy: probs and targets shapes differ");
  if (probs.rows() == 0) return 0.0;
  auto log_p = probs.derived().array().max(kLogFloor).log();
  return -(targets.derived().array() * log_p).rowwise().sum().mean();
}

// Argmax over a row; ties broken toward the smallest class index.
int argmax_row(const Matrix& m, Eigen::Index row);
std::vector<int> argmax_rows(const Matrix& m);

Matrix one_hot(const std::vector<int>& labels, int classes);

Matrix forward(const ModelParams& params, const Matrix& inputs);          // logits
Matrix forward_softmax(const ModelParams& params, const Matrix& inputs);  // probabilities

struct ForwardCache {
  Matrix hidden_pre;  // before ReLU
  Matrix hidden;
  Matrix probs;
};

ForwardCache forward_cached(const ModelParams& params, const Matrix& inputs);

// Gradients of mean cross-entropy w.r.t. every parameter (ModelParams-shaped).
ModelParams backward(const ModelParams& params, const Matrix& inputs, const Matrix& targets);

// Gradients w.r.t. parameters given dL/dprobs; chains through the softmax
// Jacobian. Needed when the loss touches probabilities other than through a
// one-hot cross-entropy (the averaged unlabeled-loss option).
ModelParams backward_probs(const ModelParams& params, const Matrix& inputs,
                           const Matrix& dloss_dprobs);

// Continue backprop from dL/dlogits using an existing forward cache.
ModelParams backward_from_dlogits(const ModelParams& params, const Matrix& inputs,
                                  const ForwardCache& cache, const Matrix& dlogits);

// Bias-corrected Adam update; increments state.step.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state);

// teacher <- decay * teacher + (1 - decay) * student, entrywise.
void ema_update(ModelParams& teacher, const ModelParams& student, double decay);

// grads += scale * other, entrywise over all parameter fields.
void add_scaled(ModelParams& grads, double scale, const ModelParams& other);

}  // namespace semisup
