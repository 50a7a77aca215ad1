#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semisup/rng.hpp"
#include "semisup/types.hpp"

namespace semisup {

struct Dataset {
  Matrix features;          // n x d
  std::vector<int> labels;  // size n; empty for unlabeled pools
  int class_count = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  bool has_labels() const { return !labels.empty(); }
};

struct ImbalanceSpec {
  std::vector<int> per_class_counts;

  int classes() const { return static_cast<int>(per_class_counts.size()); }
  long long total() const;
};

void validate(const ImbalanceSpec& spec);

struct AugmentConfig {
  double weak_noise_sigma = 0.1;
  double strong_noise_sigma = 0.5;
  double strong_dropout_prob = 0.1;
};

// strong >= weak >= 0 keeps the strong view strictly the harsher one.
void validate(const AugmentConfig& config);

struct SyntheticBench {
  Dataset labeled;
  Dataset unlabeled;                 // labels withheld
  std::vector<int> unlabeled_truth;  // hidden ground truth, diagnostics only
  Dataset heldout;                   // class-balanced, rows grouped by class
};

// Gaussian class clusters (unit variance) with means at distance class_sep
// from the origin along seeded random directions. The labeled pool follows
// the imbalance spec; the unlabeled pool draws classes with the same
// imbalanced proportions; the held-out set is class-balanced with
// heldout_per_class consecutive rows per class.
SyntheticBench generate_synthetic(const ImbalanceSpec& spec, int dim, double class_sep,
                                  int unlabeled_count, int heldout_per_class,
                                  std::uint64_t seed);

// Exactly n_per_class rows per class; without replacement when a class has
// enough samples, with replacement otherwise. Output rows grouped by class.
Dataset balanced_sample(const Dataset& labeled, int n_per_class, Rng& rng);

// x + N(0, weak_noise_sigma^2) per component.
RowVector weak_augment(const RowVector& x, const AugmentConfig& config, Rng& rng);

// x + N(0, strong_noise_sigma^2) per component, then each component
// independently zeroed with probability strong_dropout_prob. All noise is
// drawn first (component order), then all dropout decisions.
RowVector strong_augment(const RowVector& x, const AugmentConfig& config, Rng& rng);

// Row-by-row application in row order; draw order matches composing the
// single-row functions.
Matrix weak_augment_batch(const Matrix& x, const AugmentConfig& config, Rng& rng);
Matrix strong_augment_batch(const Matrix& x, const AugmentConfig& config, Rng& rng);

// CSV with header f0..f{d-1}[,label]; numbers in shortest round-trip form.
void save_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

}  // namespace semisup
