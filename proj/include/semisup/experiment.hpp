#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semisup/train.hpp"

namespace semisup {

enum class Variant { kBaseline, kSslFixedThreshold, kSslDtm, kSslDtmPost };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

// Flat key-value experiment description. Every field has a default, so an
// empty JSON object runs the desk-scale benchmark.
struct ExperimentConfig {
  TrainConfig train;
  ImbalanceSpec imbalance{{500, 300, 150, 50}};
  int feature_dim = 16;
  double class_sep = 1.8;
  int unlabeled_count = 5000;
  int heldout_per_class = 150;
  int heldout_segment_len = 50;
  int balanced_per_class = 50;
  Variant variant = Variant::kSslDtm;
  double fixed_threshold = 0.95;
  int smoothing_window = 10;
  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  bool verbose = true;  // per-seed progress lines; not part of the JSON schema
};

void validate(const ExperimentConfig& config);

// Strict parse: unknown keys are config errors, missing keys take defaults.
ExperimentConfig config_from_json(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

// Labeled pool balanced once (the per-step batches re-balance on top), plus
// the unlabeled pool, its hidden truth, and the held-out set.
Pools build_pools(const ExperimentConfig& config, std::uint64_t seed);

// Held-out rows are grouped by class; segments of heldout_segment_len frames
// never span a class boundary.
std::vector<int> heldout_segments(const ExperimentConfig& config);

// The variant's mechanism switches applied to the training config.
TrainConfig variant_train_config(const ExperimentConfig& config, std::uint64_t seed);

struct ExperimentSummary {
  std::string variant;
  std::vector<std::uint64_t> seeds;
  std::vector<double> macro_f1_per_seed;
  double macro_f1_mean = 0.0;
  double macro_f1_std = 0.0;  // sample standard deviation; 0 for one seed
  std::string directory;      // where the artifacts were written
};

// Writes, per seed: seed_<s>_epochs.csv, seed_<s>_thresholds.csv,
// seed_<s>_metrics.json (plus prediction CSVs for the post variant), and one
// summary.json for the variant.
ExperimentSummary run_experiment(const ExperimentConfig& config);

ExperimentSummary summary_from_json(const std::string& json_text);
std::string summary_to_json(const ExperimentSummary& summary);

struct ComparisonRow {
  std::string variant;
  double macro_f1_mean = 0.0;
  double macro_f1_std = 0.0;
  double delta_vs_baseline = 0.0;
};

// Each path is a summary.json or a directory containing one. The baseline
// row is the variant named "baseline" when present, the first row otherwise.
std::vector<ComparisonRow> compare_variants(const std::vector<std::string>& summary_paths);

std::string comparison_text(const std::vector<ComparisonRow>& rows);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace semisup
