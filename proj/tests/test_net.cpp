#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "semisup/net.hpp"
#include "semisup/rng.hpp"
#include "test_util.hpp"

using namespace semisup;
using namespace semisup::testing;

namespace {

ModelParams random_params(Eigen::Index d, Eigen::Index h, Eigen::Index k, Rng& rng) {
  ModelParams p = zero_params(d, h, k);
  for (auto field : kParamFields) {
    Matrix& m = p.*field;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal(0.0, 0.7);
  }
  return p;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal(0.0, scale);
  return m;
}

Matrix random_one_hot(Eigen::Index n, int k, Rng& rng) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.bounded(k));
  return one_hot(labels, k);
}

}  // namespace

TEST_CASE("softmax closed forms") {
  Matrix z(3, 2);
  z << 0.0, 0.0, 1000.0, 0.0, std::log(2.0), 0.0;
  Matrix p = softmax(z);
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p(1, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(all_finite(p));  // stabilization kept exp(1000) out
  CHECK(std::abs(p(2, 0) - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(p(2, 1) - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("softmax rows sum to one for arbitrary finite logits") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + rng.bounded(6), k = 2 + rng.bounded(5);
    const double scale = rng.uniform(0.1, 300.0);
    Matrix z = random_matrix(n, k, rng, scale);
    Matrix p = softmax(z);
    REQUIRE(all_finite(p));
    for (Eigen::Index i = 0; i < n; ++i) {
      CHECK(std::abs(p.row(i).sum() - 1.0) < 1e-9);
      for (Eigen::Index j = 0; j < k; ++j) {
        CHECK(p(i, j) >= 0.0);
        CHECK(p(i, j) <= 1.0);
        if (scale < 8.0) {
          // entries saturate to exactly 0/1 only once logit gaps pass ~37
          CHECK(p(i, j) > 0.0);
          CHECK(p(i, j) < 1.0);
        }
      }
    }
  }
}

TEST_CASE("cross entropy closed forms") {
  Matrix perfect(1, 3);
  perfect << 0.0, 1.0, 0.0;
  Matrix y(1, 3);
  y << 0.0, 1.0, 0.0;
  CHECK(cross_entropy(perfect, y) == doctest::Approx(0.0).epsilon(1e-15));

  Matrix uniform = Matrix::Constant(4, 5, 0.2);
  Matrix yu = one_hot({0, 1, 2, 3}, 5);
  CHECK(std::abs(cross_entropy(uniform, yu) - std::log(5.0)) < 1e-12);

  Matrix p(1, 2);
  p << 0.7, 0.3;
  Matrix y0 = one_hot({0}, 2);
  CHECK(std::abs(cross_entropy(p, y0) - 0.35667494393873245) < 1e-12);

  Matrix bad(2, 3);
  CHECK_THROWS_AS(cross_entropy(p, bad), DimensionError);
}

TEST_CASE("cross entropy is nonnegative and zero only at the target") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.bounded(4));
    Matrix z = random_matrix(3, k, rng, 3.0);
    Matrix p = softmax(z);
    Matrix y = random_one_hot(3, k, rng);
    const double ce = cross_entropy(p, y);
    CHECK(ce >= 0.0);
    CHECK(ce > 0.0);  // softmax output never reaches exactly 1
  }
}

TEST_CASE("forward zero parameters give zero logits") {
  ModelParams p = zero_params(4, 3, 2);
  Matrix x = Matrix::Random(5, 4);
  Matrix logits = forward(p, x);
  CHECK(logits.rows() == 5);
  CHECK(logits.cols() == 2);
  CHECK(logits.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward reproduces inputs through identity weights") {
  ModelParams p = zero_params(2, 2, 2);
  p.w1 = Matrix::Identity(2, 2);
  p.w2 = Matrix::Identity(2, 2);
  Matrix x(2, 2);
  x << 1.0, 2.0, 3.0, 0.5;  // positive, so ReLU passes through
  Matrix logits = forward(p, x);
  CHECK((logits - x).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("forward matches a straight-line re-implementation") {
  Rng rng(21);
  ModelParams p = random_params(4, 5, 2, rng);
  Matrix x = random_matrix(3, 4, rng);
  Matrix got = forward(p, x);
  Matrix want = forward_oracle(p, x);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward rejects mismatched input width") {
  ModelParams p = zero_params(4, 3, 2);
  Matrix x = Matrix::Zero(2, 5);
  CHECK_THROWS_AS(forward(p, x), DimensionError);
}

TEST_CASE("backward is zero when probabilities equal targets") {
  // K = 1 makes softmax output exactly the one-hot target.
  Rng rng(3);
  ModelParams p = random_params(3, 4, 1, rng);
  Matrix x = random_matrix(2, 3, rng);
  Matrix y = Matrix::Ones(2, 1);
  ModelParams g = backward(p, x, y);
  for (auto field : kParamFields) CHECK((g.*field).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    ModelParams p = random_params(3, 4, 3, rng);
    Matrix x = random_matrix(2, 3, rng);
    Matrix y = random_one_hot(2, 3, rng);
    ModelParams analytic = backward(p, x, y);
    ModelParams fd = fd_gradients(p, x, y, 1e-5);
    CHECK(max_grad_rel_err(analytic, fd) < 1e-4);
  }
}

TEST_CASE("backward mean gradient is invariant to duplicating the batch") {
  Rng rng(9);
  ModelParams p = random_params(4, 5, 3, rng);
  Matrix x = random_matrix(3, 4, rng);
  Matrix y = random_one_hot(3, 3, rng);
  Matrix x2(6, 4), y2(6, 3);
  x2 << x, x;
  y2 << y, y;
  ModelParams g1 = backward(p, x, y);
  ModelParams g2 = backward(p, x2, y2);
  for (auto field : kParamFields)
    CHECK((g1.*field - g2.*field).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("backward_probs agrees with backward for one-hot cross-entropy") {
  Rng rng(13);
  ModelParams p = random_params(3, 4, 3, rng);
  Matrix x = random_matrix(2, 3, rng);
  Matrix y = random_one_hot(2, 3, rng);
  Matrix probs = forward_softmax(p, x);
  // dL/dp for mean CE: -y / p / n
  Matrix dprobs = (-y.array() / probs.array() / double(x.rows())).matrix();
  ModelParams via_probs = backward_probs(p, x, dprobs);
  ModelParams direct = backward(p, x, y);
  for (auto field : kParamFields)
    CHECK((via_probs.*field - direct.*field).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
  Rng rng(17);
  ModelParams p = random_params(3, 2, 2, rng);
  ModelParams before = p;
  ModelParams g = zero_params(3, 2, 2);
  AdamState st = make_adam(p);
  adam_step(p, g, st);
  CHECK(st.step == 1);
  for (auto field : kParamFields)
    CHECK((p.*field - before.*field).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam first step moves by about lr in the gradient direction") {
  ModelParams p = zero_params(1, 1, 1);
  p.w1(0, 0) = 1.0;
  ModelParams g = zero_params(1, 1, 1);
  g.w1(0, 0) = 0.5;
  AdamState st = make_adam(p);
  adam_step(p, g, st);
  CHECK(std::abs(p.w1(0, 0) - (1.0 - st.lr)) < 1e-9);
}

TEST_CASE("adam matches a hand-rolled scalar trace over two steps") {
  const double g = -0.3, p0 = 0.2;
  ModelParams p = zero_params(1, 1, 1);
  p.w1(0, 0) = p0;
  ModelParams grad = zero_params(1, 1, 1);
  grad.w1(0, 0) = g;
  AdamState st = make_adam(p);

  double m = 0.0, v = 0.0, expect = p0;
  for (int t = 1; t <= 2; ++t) {
    m = st.beta1 * m + (1.0 - st.beta1) * g;
    v = st.beta2 * v + (1.0 - st.beta2) * g * g;
    const double mh = m / (1.0 - std::pow(st.beta1, t));
    const double vh = v / (1.0 - std::pow(st.beta2, t));
    expect -= st.lr * mh / (std::sqrt(vh) + st.eps);
    adam_step(p, grad, st);
    CHECK(std::abs(p.w1(0, 0) - expect) < 1e-15);
  }
}

TEST_CASE("adam is deterministic") {
  Rng rng(23);
  ModelParams p1 = random_params(3, 4, 2, rng);
  ModelParams p2 = p1;
  Rng rng2(29);
  ModelParams g = random_params(3, 4, 2, rng2);
  AdamState s1 = make_adam(p1), s2 = make_adam(p2);
  adam_step(p1, g, s1);
  adam_step(p2, g, s2);
  for (auto field : kParamFields) CHECK((p1.*field) == (p2.*field));
}

TEST_CASE("ema arithmetic") {
  ModelParams t = zero_params(2, 2, 2);
  ModelParams s = zero_params(2, 2, 2);
  for (auto field : kParamFields) (s.*field).setOnes();
  ema_update(t, s, 0.999);
  for (auto field : kParamFields)
    CHECK(std::abs((t.*field)(0, 0) - 0.001) < 1e-12);

  ModelParams frozen = zero_params(2, 2, 2);
  frozen.w1(0, 0) = 0.4;
  ModelParams copy = frozen;
  ema_update(frozen, s, 1.0);
  for (auto field : kParamFields)
    CHECK((frozen.*field) == (copy.*field));
}

TEST_CASE("ema follows the geometric closed form under a constant student") {
  const double t0 = 0.25, s0 = 0.8, decay = 0.9;
  ModelParams t = zero_params(1, 1, 1);
  t.w1(0, 0) = t0;
  ModelParams s = zero_params(1, 1, 1);
  s.w1(0, 0) = s0;
  for (int n = 1; n <= 5; ++n) {
    ema_update(t, s, decay);
    const double want = t0 * std::pow(decay, n) + s0 * (1.0 - std::pow(decay, n));
    CHECK(std::abs(t.w1(0, 0) - want) < 1e-12);
  }
}

TEST_CASE("ema validates shapes and decay range") {
  ModelParams t = zero_params(2, 2, 2);
  ModelParams s = zero_params(3, 2, 2);
  CHECK_THROWS_AS(ema_update(t, s, 0.5), DimensionError);
  ModelParams s2 = zero_params(2, 2, 2);
  CHECK_THROWS_AS(ema_update(t, s2, 1.5), ConfigError);
}

TEST_CASE("argmax ties break toward the smallest index") {
  Matrix m(2, 3);
  m << 0.4, 0.4, 0.2, 0.1, 0.5, 0.5;
  CHECK(argmax_row(m, 0) == 0);
  CHECK(argmax_row(m, 1) == 1);
  auto all = argmax_rows(m);
  CHECK(all == std::vector<int>{0, 1});
}

TEST_CASE("glorot init stays inside the fan bound and is seeded") {
  Rng a(42), b(42);
  ModelParams p1 = init_params(6, 4, 3, a);
  ModelParams p2 = init_params(6, 4, 3, b);
  for (auto field : kParamFields) CHECK((p1.*field) == (p2.*field));
  CHECK(p1.b1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p1.b2.cwiseAbs().maxCoeff() == 0.0);
  const double lim1 = std::sqrt(6.0 / (6 + 4));
  const double lim2 = std::sqrt(6.0 / (4 + 3));
  CHECK(p1.w1.cwiseAbs().maxCoeff() <= lim1);
  CHECK(p1.w2.cwiseAbs().maxCoeff() <= lim2);
  CHECK(p1.w1.cwiseAbs().maxCoeff() > 0.0);
}
