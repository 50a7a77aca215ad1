#include "semisup/net.hpp"

#include <cmath>

namespace semisup {

ModelParams zero_params(Eigen::Index dim, Eigen::Index hidden, Eigen::Index classes) {
  require_dims(dim >= 1 && hidden >= 1 && classes >= 1, "zero_params: sizes must be >= 1");
  ModelParams p;
  p.w1 = Matrix::Zero(dim, hidden);
  p.b1 = Matrix::Zero(1, hidden);
  p.w2 = Matrix::Zero(hidden, classes);
  p.b2 = Matrix::Zero(1, classes);
  return p;
}

ModelParams init_params(Eigen::Index dim, Eigen::Index hidden, Eigen::Index classes, Rng& rng) {
  ModelParams p = zero_params(dim, hidden, classes);
  for (Matrix* w : {&p.w1, &p.w2}) {
    const double limit = std::sqrt(6.0 / double(w->rows() + w->cols()));
    for (Eigen::Index i = 0; i < w->rows(); ++i)
      for (Eigen::Index j = 0; j < w->cols(); ++j) (*w)(i, j) = rng.uniform(-limit, limit);
  }
  return p;
}

bool same_shape(const ModelParams& a, const ModelParams& b) {
  for (auto field : kParamFields) {
    if ((a.*field).rows() != (b.*field).rows()) return false;
    if ((a.*field).cols() != (b.*field).cols()) return false;
  }
  return true;
}

AdamState make_adam(const ModelParams& shape, double lr) {
  AdamState st;
  st.first_moment = zero_params(shape.input_dim(), shape.hidden_dim(), shape.class_count());
  st.second_moment = st.first_moment;
  st.lr = lr;
  return st;
}

int argmax_row(const Matrix& m, Eigen::Index row) {
  int best = 0;
  for (Eigen::Index j = 1; j < m.cols(); ++j)
    if (m(row, j) > m(row, best)) best = static_cast<int>(j);
  return best;
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = argmax_row(m, i);
  return out;
}

Matrix one_hot(const std::vector<int>& labels, int classes) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require_dims(labels[i] >= 0 && labels[i] < classes, "one_hot: label out of range");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

namespace {

void check_forward_shapes(const ModelParams& p, const Matrix& inputs) {
  require_dims(inputs.cols() == p.input_dim(), "forward: input width != model input_dim");
  require_dims(p.w1.cols() == p.b1.cols() && p.w1.cols() == p.w2.rows() &&
                   p.w2.cols() == p.b2.cols(),
               "forward: inconsistent parameter shapes");
}

}  // namespace

Matrix forward(const ModelParams& params, const Matrix& inputs) {
  check_forward_shapes(params, inputs);
  Matrix hidden = relu((inputs * params.w1).rowwise() + params.b1.row(0));
  return (hidden * params.w2).rowwise() + params.b2.row(0);
}

Matrix forward_softmax(const ModelParams& params, const Matrix& inputs) {
  return softmax(forward(params, inputs));
}

ForwardCache forward_cached(const ModelParams& params, const Matrix& inputs) {
  check_forward_shapes(params, inputs);
  ForwardCache c;
  c.hidden_pre = (inputs * params.w1).rowwise() + params.b1.row(0);
  c.hidden = relu(c.hidden_pre);
  c.probs = softmax((c.hidden * params.w2).rowwise() + params.b2.row(0));
  return c;
}

ModelParams backward_from_dlogits(const ModelParams& params, const Matrix& inputs,
                                  const ForwardCache& cache, const Matrix& dlogits) {
  ModelParams g = zero_params(params.input_dim(), params.hidden_dim(), params.class_count());
  g.w2 = cache.hidden.transpose() * dlogits;
  g.b2 = dlogits.colwise().sum();
  Matrix dhidden = dlogits * params.w2.transpose();
  // ReLU subgradient at 0 is taken as 0.
  Matrix dpre = (dhidden.array() * (cache.hidden_pre.array() > 0.0).cast<double>()).matrix();
  g.w1 = inputs.transpose() * dpre;
  g.b1 = dpre.colwise().sum();
  return g;
}

ModelParams backward(const ModelParams& params, const Matrix& inputs, const Matrix& targets) {
  require_dims(targets.cols() == params.class_count() && targets.rows() == inputs.rows(),
               "backward: target shape mismatch");
  const ForwardCache cache = forward_cached(params, inputs);
  const double n = static_cast<double>(inputs.rows());
  Matrix dlogits = (cache.probs - targets) / n;
  return backward_from_dlogits(params, inputs, cache, dlogits);
}

ModelParams backward_probs(const ModelParams& params, const Matrix& inputs,
                           const Matrix& dloss_dprobs) {
  require_dims(dloss_dprobs.cols() == params.class_count() &&
                   dloss_dprobs.rows() == inputs.rows(),
               "backward_probs: dprobs shape mismatch");
  const ForwardCache cache = forward_cached(params, inputs);
  // Softmax Jacobian: dz_j = p_j * (g_j - sum_k g_k p_k)
  Vector row_dot = (dloss_dprobs.array() * cache.probs.array()).rowwise().sum();
  Matrix dlogits =
      (cache.probs.array() * (dloss_dprobs.array().colwise() - row_dot.array())).matrix();
  return backward_from_dlogits(params, inputs, cache, dlogits);
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
  require_dims(same_shape(params, grads) && same_shape(params, state.first_moment),
               "adam_step: shape mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (auto field : kParamFields) {
    Matrix& p = params.*field;
    const Matrix& g = grads.*field;
    Matrix& m = state.first_moment.*field;
    Matrix& v = state.second_moment.*field;
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = (state.beta2 * v.array() + (1.0 - state.beta2) * g.array().square()).matrix();
    p.array() -= state.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.eps);
  }
}

void ema_update(ModelParams& teacher, const ModelParams& student, double decay) {
  require_config(decay >= 0.0 && decay <= 1.0, "ema_update: decay outside [0,1]");
  require_dims(same_shape(teacher, student), "ema_update: shape mismatch");
  for (auto field : kParamFields)
    teacher.*field = decay * (teacher.*field) + (1.0 - decay) * (student.*field);
}

void add_scaled(ModelParams& grads, double scale, const ModelParams& other) {
  require_dims(same_shape(grads, other), "add_scaled: shape mismatch");
  for (auto field : kParamFields) grads.*field += scale * (other.*field);
}

}  // namespace semisup
