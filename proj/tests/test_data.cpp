#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "semisup/data.hpp"
#include "semisup/net.hpp"

using namespace semisup;

namespace {

std::vector<int> class_histogram(const Dataset& d) {
  std::vector<int> hist(d.class_count, 0);
  for (int l : d.labels) hist[l] += 1;
  return hist;
}

}  // namespace

TEST_CASE("generate_synthetic honors the imbalance spec exactly") {
  const ImbalanceSpec spec{{10, 10}};
  SyntheticBench b = generate_synthetic(spec, 2, 4.0, 30, 5, 123);
  CHECK(b.labeled.size() == 20);
  CHECK(class_histogram(b.labeled) == std::vector<int>{10, 10});
  CHECK(b.unlabeled.size() == 30);
  CHECK_FALSE(b.unlabeled.has_labels());
  CHECK(b.unlabeled_truth.size() == 30);
  CHECK(b.heldout.size() == 10);
  CHECK(class_histogram(b.heldout) == std::vector<int>{5, 5});
  CHECK(all_finite(b.labeled.features));
  CHECK(all_finite(b.unlabeled.features));
  CHECK(all_finite(b.heldout.features));
}

TEST_CASE("generate_synthetic is a pure function of its arguments") {
  const ImbalanceSpec spec{{40, 8, 17}};
  SyntheticBench a = generate_synthetic(spec, 5, 3.0, 100, 10, 9);
  SyntheticBench b = generate_synthetic(spec, 5, 3.0, 100, 10, 9);
  CHECK(a.labeled.features == b.labeled.features);
  CHECK(a.labeled.labels == b.labeled.labels);
  CHECK(a.unlabeled.features == b.unlabeled.features);
  CHECK(a.unlabeled_truth == b.unlabeled_truth);
  CHECK(a.heldout.features == b.heldout.features);

  SyntheticBench c = generate_synthetic(spec, 5, 3.0, 100, 10, 10);
  CHECK(a.labeled.features != c.labeled.features);
}

TEST_CASE("generate_synthetic rejects invalid specs") {
  CHECK_THROWS_AS(generate_synthetic(ImbalanceSpec{{}}, 4, 2.0, 10, 5, 1), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(ImbalanceSpec{{5, 0}}, 4, 2.0, 10, 5, 1), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(ImbalanceSpec{{5, 5}}, 1, 2.0, 10, 5, 1), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(ImbalanceSpec{{5, 5}}, 4, 0.0, 10, 5, 1), ConfigError);
}

TEST_CASE("well separated clusters are learnable by a nearest-mean probe") {
  // Calibration probe for the class_sep default: at sep 8 a supervised-only
  // linear rule must be nearly perfect.
  const ImbalanceSpec spec{{50, 50}};
  SyntheticBench b = generate_synthetic(spec, 2, 8.0, 0, 100, 77);
  Matrix means = Matrix::Zero(2, 2);
  std::vector<int> counts(2, 0);
  for (Eigen::Index i = 0; i < b.labeled.size(); ++i) {
    means.row(b.labeled.labels[i]) += b.labeled.features.row(i);
    counts[b.labeled.labels[i]] += 1;
  }
  for (int c = 0; c < 2; ++c) means.row(c) /= counts[c];
  int correct = 0;
  for (Eigen::Index i = 0; i < b.heldout.size(); ++i) {
    const double d0 = (b.heldout.features.row(i) - means.row(0)).squaredNorm();
    const double d1 = (b.heldout.features.row(i) - means.row(1)).squaredNorm();
    const int pred = d1 < d0 ? 1 : 0;
    correct += pred == b.heldout.labels[i];
  }
  CHECK(double(correct) / double(b.heldout.size()) >= 0.95);
}

TEST_CASE("balanced_sample forces exact per-class counts") {
  Rng gen(1);
  SyntheticBench b = generate_synthetic(ImbalanceSpec{{100, 10}}, 3, 3.0, 0, 1, 5);
  Rng rng(2);
  Dataset s = balanced_sample(b.labeled, 10, rng);
  CHECK(s.size() == 20);
  CHECK(class_histogram(s) == std::vector<int>{10, 10});
}

TEST_CASE("balanced_sample repeats samples when a class is deficient") {
  Dataset d;
  d.class_count = 2;
  d.features = Matrix::Zero(12, 2);
  for (int i = 0; i < 12; ++i) {
    d.features(i, 0) = i;
    d.labels.push_back(i < 10 ? 0 : 1);
  }
  Rng rng(3);
  Dataset s = balanced_sample(d, 20, rng);
  CHECK(s.size() == 40);
  CHECK(class_histogram(s) == std::vector<int>{20, 20});
  // class 1 has only features {10, 11}, so 20 draws must repeat
  int from_class1 = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s.labels[i] == 1) {
      from_class1 += 1;
      CHECK((s.features(i, 0) == 10.0 || s.features(i, 0) == 11.0));
    }
  CHECK(from_class1 == 20);
}

TEST_CASE("balanced_sample output histogram is uniform for any imbalance") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 2 + static_cast<int>(rng.bounded(4));
    ImbalanceSpec spec;
    for (int c = 0; c < k; ++c)
      spec.per_class_counts.push_back(1 + static_cast<int>(rng.bounded(40)));
    SyntheticBench b =
        generate_synthetic(spec, 2, 3.0, 0, 1, 1000 + trial);
    const int n = 1 + static_cast<int>(rng.bounded(25));
    Dataset s = balanced_sample(b.labeled, n, rng);
    CHECK(class_histogram(s) == std::vector<int>(k, n));
  }
}

TEST_CASE("balanced_sample rejects an empty class") {
  Dataset d;
  d.class_count = 3;
  d.features = Matrix::Zero(4, 2);
  d.labels = {0, 0, 1, 1};  // class 2 empty
  Rng rng(4);
  CHECK_THROWS_AS(balanced_sample(d, 2, rng), ConfigError);
}

TEST_CASE("augment with zero strength is the identity") {
  AugmentConfig cfg;
  cfg.weak_noise_sigma = 0.0;
  cfg.strong_noise_sigma = 0.0;
  cfg.strong_dropout_prob = 0.0;
  RowVector x(3);
  x << 1.0, -2.0, 0.5;
  Rng rng(5);
  CHECK(weak_augment(x, cfg, rng) == x);
  CHECK(strong_augment(x, cfg, rng) == x);
}

TEST_CASE("strong augment with dropout one zeroes everything") {
  AugmentConfig cfg;
  cfg.weak_noise_sigma = 0.0;
  cfg.strong_noise_sigma = 0.0;
  cfg.strong_dropout_prob = 1.0;
  RowVector x(4);
  x << 1.0, 2.0, 3.0, 4.0;
  Rng rng(6);
  RowVector out = strong_augment(x, cfg, rng);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("augmentations are deterministic and preserve shape and finiteness") {
  AugmentConfig cfg;
  RowVector x = RowVector::LinSpaced(5, -1.0, 1.0);
  Rng a(7), b(7);
  RowVector w = weak_augment(x, cfg, a);
  CHECK(w == weak_augment(x, cfg, b));
  RowVector s = strong_augment(x, cfg, a);
  CHECK(s == strong_augment(x, cfg, b));
  CHECK(w.size() == x.size());
  CHECK(s.size() == x.size());
  CHECK(all_finite(w));
  CHECK(all_finite(s));
}

TEST_CASE("weak augment noise has the configured standard deviation") {
  AugmentConfig cfg;
  cfg.weak_noise_sigma = 0.37;
  const int draws = 100000;
  RowVector x = RowVector::Zero(1);
  Rng rng(8);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v = weak_augment(x, cfg, rng)(0);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / draws;
  const double sd = std::sqrt(sumsq / draws - mean * mean);
  CHECK(sd == doctest::Approx(cfg.weak_noise_sigma).epsilon(0.02));
}

TEST_CASE("strong augment zeroes the configured fraction of components") {
  AugmentConfig cfg;
  cfg.strong_noise_sigma = 0.0;
  cfg.weak_noise_sigma = 0.0;
  cfg.strong_dropout_prob = 0.23;
  const int draws = 100000;
  RowVector x = RowVector::Ones(1);
  Rng rng(9);
  int zeroed = 0;
  for (int i = 0; i < draws; ++i)
    if (strong_augment(x, cfg, rng)(0) == 0.0) zeroed += 1;
  CHECK(double(zeroed) / draws == doctest::Approx(cfg.strong_dropout_prob).epsilon(0.02));
}

TEST_CASE("augment config validation") {
  AugmentConfig bad;
  bad.weak_noise_sigma = 0.5;
  bad.strong_noise_sigma = 0.1;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  AugmentConfig bad2;
  bad2.strong_dropout_prob = 1.5;
  CHECK_THROWS_AS(validate(bad2), ConfigError);
}

TEST_CASE("augmented points stay nearest their own class mean") {
  // Semantic-consistency proxy: both views keep the sample identifiable with
  // probability well above chance at the default corruption strengths.
  AugmentConfig cfg;  // defaults
  const int k = 4, d = 16;
  ImbalanceSpec spec{{50, 50, 50, 50}};
  SyntheticBench b = generate_synthetic(spec, d, 3.0, 0, 1, 31);
  Matrix means = Matrix::Zero(k, d);
  std::vector<int> counts(k, 0);
  for (Eigen::Index i = 0; i < b.labeled.size(); ++i) {
    means.row(b.labeled.labels[i]) += b.labeled.features.row(i);
    counts[b.labeled.labels[i]] += 1;
  }
  for (int c = 0; c < k; ++c) means.row(c) /= counts[c];

  Rng rng(32);
  int consistent = 0, total = 0;
  for (Eigen::Index i = 0; i < b.labeled.size(); ++i) {
    const RowVector x = b.labeled.features.row(i);
    for (const RowVector& view :
         {weak_augment(x, cfg, rng), strong_augment(x, cfg, rng)}) {
      int nearest = 0;
      double best = (view - means.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double dist = (view - means.row(c)).squaredNorm();
        if (dist < best) {
          best = dist;
          nearest = c;
        }
      }
      consistent += nearest == b.labeled.labels[i];
      total += 1;
    }
  }
  CHECK(double(consistent) / double(total) > 0.9);
}

TEST_CASE("dataset CSV round-trips exactly") {
  SyntheticBench b = generate_synthetic(ImbalanceSpec{{7, 3}}, 4, 2.5, 6, 2, 55);
  const auto dir = std::filesystem::temp_directory_path() / "semisup_test_data";
  std::filesystem::create_directories(dir);

  const std::string labeled_path = (dir / "labeled.csv").string();
  save_dataset_csv(b.labeled, labeled_path);
  Dataset back = load_dataset_csv(labeled_path);
  CHECK(back.features == b.labeled.features);
  CHECK(back.labels == b.labeled.labels);
  CHECK(back.class_count == b.labeled.class_count);

  const std::string unlabeled_path = (dir / "unlabeled.csv").string();
  save_dataset_csv(b.unlabeled, unlabeled_path);
  Dataset back_u = load_dataset_csv(unlabeled_path);
  CHECK(back_u.features == b.unlabeled.features);
  CHECK_FALSE(back_u.has_labels());

  std::filesystem::remove_all(dir);
}
