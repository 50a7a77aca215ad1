#include "semisup/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semisup/io.hpp"
#include "semisup/metrics.hpp"
#include "semisup/smoothing.hpp"

namespace semisup {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kSslFixedThreshold: return "ssl_fixed_threshold";
    case Variant::kSslDtm: return "ssl_dtm";
    case Variant::kSslDtmPost: return "ssl_dtm_post";
  }
  throw ConfigError("unknown variant enum value");
}

Variant variant_from_string(const std::string& name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "ssl_fixed_threshold") return Variant::kSslFixedThreshold;
  if (name == "ssl_dtm") return Variant::kSslDtm;
  if (name == "ssl_dtm_post") return Variant::kSslDtmPost;
  throw ConfigError("unknown variant: '" + name +
                    "' (expected baseline | ssl_fixed_threshold | ssl_dtm | ssl_dtm_post)");
}

void validate(const ExperimentConfig& config) {
  validate(config.train);
  validate(config.imbalance);
  require_config(config.feature_dim >= 2, "feature_dim must be >= 2");
  require_config(config.class_sep > 0.0, "class_sep must be > 0");
  require_config(config.unlabeled_count >= 1, "unlabeled_count must be >= 1");
  require_config(config.heldout_per_class >= 1, "heldout_per_class must be >= 1");
  require_config(config.heldout_segment_len >= 1, "heldout_segment_len must be >= 1");
  require_config(config.balanced_per_class >= 1, "balanced_per_class must be >= 1");
  require_config(config.fixed_threshold >= 0.0 && config.fixed_threshold <= 1.0,
                 "fixed_threshold must be in [0,1]");
  require_config(config.smoothing_window >= 1, "smoothing_window must be >= 1");
  require_config(!config.seeds.empty(), "seed list must be non-empty");
  require_config(!config.output_dir.empty(), "output_dir must be non-empty");
}

namespace {

std::string target_to_string(UnlabeledLossTarget t) {
  return t == UnlabeledLossTarget::kStrongView ? "strong_view" : "averaged";
}

UnlabeledLossTarget target_from_string(const std::string& name) {
  if (name == "strong_view") return UnlabeledLossTarget::kStrongView;
  if (name == "averaged") return UnlabeledLossTarget::kAveraged;
  throw ConfigError("unknown unlabeled_loss_target: '" + name +
                    "' (expected strong_view | averaged)");
}

template <typename T>
void read_key(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const std::vector<std::string> known = {
      "variant", "seeds", "output_dir", "epochs", "steps_per_epoch", "labeled_batch",
      "unlabeled_batch", "lambda1", "lambda2", "mu", "ema_decay", "hidden_units",
      "learning_rate", "unlabeled_loss_target", "fixed_threshold", "smoothing_window",
      "per_class_counts", "feature_dim", "class_sep", "unlabeled_count",
      "heldout_per_class", "heldout_segment_len", "balanced_per_class",
      "weak_noise_sigma", "strong_noise_sigma", "strong_dropout_prob"};
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw ConfigError("unknown config key: '" + item.key() + "'");

  ExperimentConfig c;
  if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
  read_key(j, "seeds", c.seeds);
  read_key(j, "output_dir", c.output_dir);
  read_key(j, "epochs", c.train.epochs);
  read_key(j, "steps_per_epoch", c.train.steps_per_epoch);
  read_key(j, "labeled_batch", c.train.labeled_batch);
  read_key(j, "unlabeled_batch", c.train.unlabeled_batch);
  read_key(j, "lambda1", c.train.lambda1);
  read_key(j, "lambda2", c.train.lambda2);
  read_key(j, "mu", c.train.mu);
  read_key(j, "ema_decay", c.train.ema_decay);
  read_key(j, "hidden_units", c.train.hidden_units);
  read_key(j, "learning_rate", c.train.learning_rate);
  if (j.contains("unlabeled_loss_target"))
    c.train.unlabeled_loss_target =
        target_from_string(j.at("unlabeled_loss_target").get<std::string>());
  read_key(j, "fixed_threshold", c.fixed_threshold);
  read_key(j, "smoothing_window", c.smoothing_window);
  read_key(j, "per_class_counts", c.imbalance.per_class_counts);
  read_key(j, "feature_dim", c.feature_dim);
  read_key(j, "class_sep", c.class_sep);
  read_key(j, "unlabeled_count", c.unlabeled_count);
  read_key(j, "heldout_per_class", c.heldout_per_class);
  read_key(j, "heldout_segment_len", c.heldout_segment_len);
  read_key(j, "balanced_per_class", c.balanced_per_class);
  read_key(j, "weak_noise_sigma", c.train.augment.weak_noise_sigma);
  read_key(j, "strong_noise_sigma", c.train.augment.strong_noise_sigma);
  read_key(j, "strong_dropout_prob", c.train.augment.strong_dropout_prob);
  validate(c);
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  Json j;
  j["variant"] = to_string(c.variant);
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["epochs"] = c.train.epochs;
  j["steps_per_epoch"] = c.train.steps_per_epoch;
  j["labeled_batch"] = c.train.labeled_batch;
  j["unlabeled_batch"] = c.train.unlabeled_batch;
  j["lambda1"] = c.train.lambda1;
  j["lambda2"] = c.train.lambda2;
  j["mu"] = c.train.mu;
  j["ema_decay"] = c.train.ema_decay;
  j["hidden_units"] = c.train.hidden_units;
  j["learning_rate"] = c.train.learning_rate;
  j["unlabeled_loss_target"] = target_to_string(c.train.unlabeled_loss_target);
  j["fixed_threshold"] = c.fixed_threshold;
  j["smoothing_window"] = c.smoothing_window;
  j["per_class_counts"] = c.imbalance.per_class_counts;
  j["feature_dim"] = c.feature_dim;
  j["class_sep"] = c.class_sep;
  j["unlabeled_count"] = c.unlabeled_count;
  j["heldout_per_class"] = c.heldout_per_class;
  j["heldout_segment_len"] = c.heldout_segment_len;
  j["balanced_per_class"] = c.balanced_per_class;
  j["weak_noise_sigma"] = c.train.augment.weak_noise_sigma;
  j["strong_noise_sigma"] = c.train.augment.strong_noise_sigma;
  j["strong_dropout_prob"] = c.train.augment.strong_dropout_prob;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(text);
}

Pools build_pools(const ExperimentConfig& config, std::uint64_t seed) {
  SyntheticBench bench =
      generate_synthetic(config.imbalance, config.feature_dim, config.class_sep,
                         config.unlabeled_count, config.heldout_per_class, seed);
  Rng pool_rng = Rng::stream(seed, 3);
  Pools pools;
  pools.labeled = balanced_sample(bench.labeled, config.balanced_per_class, pool_rng);
  pools.unlabeled = std::move(bench.unlabeled);
  pools.unlabeled_truth = std::move(bench.unlabeled_truth);
  pools.heldout = std::move(bench.heldout);
  return pools;
}

std::vector<int> heldout_segments(const ExperimentConfig& config) {
  std::vector<int> ids;
  int next = 0;
  for (int c = 0; c < config.imbalance.classes(); ++c) {
    for (int i = 0; i < config.heldout_per_class; ++i) {
      if (i > 0 && i % config.heldout_segment_len == 0) ++next;
      ids.push_back(next);
    }
    ++next;
  }
  return ids;
}

TrainConfig variant_train_config(const ExperimentConfig& config, std::uint64_t seed) {
  TrainConfig tc = config.train;
  tc.seed = seed;
  switch (config.variant) {
    case Variant::kBaseline:
      tc.lambda2 = 0.0;
      tc.use_unlabeled = false;
      tc.dtm_update = true;
      break;
    case Variant::kSslFixedThreshold:
      tc.use_unlabeled = true;
      tc.dtm_update = false;
      tc.initial_threshold = config.fixed_threshold;
      break;
    case Variant::kSslDtm:
    case Variant::kSslDtmPost:
      tc.use_unlabeled = true;
      tc.dtm_update = true;
      break;
  }
  return tc;
}

namespace {

std::string epochs_csv(const std::vector<EpochReport>& reports, int classes) {
  std::ostringstream out;
  out << "epoch,loss_total,loss_labeled,loss_unlabeled,accepted_fraction,"
         "pseudo_label_accuracy,heldout_macro_f1";
  for (int c = 0; c < classes; ++c) out << ",tau_" << c;
  out << '\n';
  for (const auto& r : reports) {
    out << r.epoch << ',' << format_double(r.mean_loss.total) << ','
        << format_double(r.mean_loss.labeled) << ',' << format_double(r.mean_loss.unlabeled)
        << ',' << format_double(r.accepted_fraction) << ','
        << format_double(r.pseudo_label_accuracy) << ','
        << format_double(r.heldout_macro_f1);
    for (int c = 0; c < classes; ++c) out << ',' << format_double(r.thresholds(c));
    out << '\n';
  }
  return out.str();
}

// Row 0 is the initial state; row t is the state after t completed epochs.
std::string thresholds_csv(const Vector& initial, const std::vector<EpochReport>& reports) {
  std::ostringstream out;
  out << "epoch";
  for (Eigen::Index c = 0; c < initial.size(); ++c) out << ",tau_" << c;
  out << '\n';
  out << 0;
  for (Eigen::Index c = 0; c < initial.size(); ++c) out << ',' << format_double(initial(c));
  out << '\n';
  for (const auto& r : reports) {
    out << (r.epoch + 1);
    for (Eigen::Index c = 0; c < r.thresholds.size(); ++c)
      out << ',' << format_double(r.thresholds(c));
    out << '\n';
  }
  return out.str();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / double(v.size() - 1));
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  validate(config);
  const std::string variant_name = to_string(config.variant);
  const fs::path dir = fs::path(config.output_dir) / variant_name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  ExperimentSummary summary;
  summary.variant = variant_name;
  summary.seeds = config.seeds;
  summary.directory = dir.string();

  for (std::uint64_t seed : config.seeds) {
    Pools pools = build_pools(config, seed);
    const TrainConfig tc = variant_train_config(config, seed);
    auto [state, reports] = train_run(tc, pools);

    const std::string prefix = (dir / ("seed_" + std::to_string(seed))).string();
    write_text_file(prefix + "_epochs.csv", epochs_csv(reports, pools.labeled.class_count));
    const double tau0 = tc.initial_threshold < 0.0
                            ? 1.0 / double(pools.labeled.class_count)
                            : tc.initial_threshold;
    write_text_file(prefix + "_thresholds.csv",
                    thresholds_csv(Vector::Constant(pools.labeled.class_count, tau0), reports));

    std::vector<int> preds = predict_classes(state.student, pools.heldout.features);
    if (config.variant == Variant::kSslDtmPost) {
      LabelSequence raw = make_sequence(preds, heldout_segments(config),
                                        pools.heldout.class_count);
      save_labels_csv(raw, prefix + "_predictions_raw.csv");
      LabelSequence smoothed = smooth(raw, config.smoothing_window);
      save_labels_csv(smoothed, prefix + "_predictions_smoothed.csv");
      preds = smoothed.labels;
    }
    const MetricsReport metrics =
        macro_f1(confusion(preds, pools.heldout.labels, pools.heldout.class_count));
    write_text_file(prefix + "_metrics.json", metrics_to_json(metrics));
    summary.macro_f1_per_seed.push_back(metrics.macro_f1);
    if (config.verbose)
      std::printf("%s seed %llu: heldout macro_f1 %.4f\n", variant_name.c_str(),
                  static_cast<unsigned long long>(seed), metrics.macro_f1);
  }

  summary.macro_f1_mean = mean_of(summary.macro_f1_per_seed);
  summary.macro_f1_std = sample_std(summary.macro_f1_per_seed, summary.macro_f1_mean);
  write_text_file((dir / "summary.json").string(), summary_to_json(summary));
  return summary;
}

std::string summary_to_json(const ExperimentSummary& summary) {
  Json j;
  j["variant"] = summary.variant;
  j["seeds"] = summary.seeds;
  j["macro_f1_per_seed"] = summary.macro_f1_per_seed;
  j["macro_f1_mean"] = summary.macro_f1_mean;
  j["macro_f1_std"] = summary.macro_f1_std;
  return j.dump(2) + "\n";
}

ExperimentSummary summary_from_json(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("summary is not valid JSON: ") + e.what());
  }
  ExperimentSummary s;
  try {
    s.variant = j.at("variant").get<std::string>();
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.macro_f1_per_seed = j.at("macro_f1_per_seed").get<std::vector<double>>();
    s.macro_f1_mean = j.at("macro_f1_mean").get<double>();
    s.macro_f1_std = j.at("macro_f1_std").get<double>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("summary JSON missing fields: ") + e.what());
  }
  return s;
}

std::vector<ComparisonRow> compare_variants(const std::vector<std::string>& summary_paths) {
  require_valid(!summary_paths.empty(), "compare_variants: no summaries given");
  std::vector<ExperimentSummary> summaries;
  for (const std::string& given : summary_paths) {
    fs::path p = given;
    if (fs::is_directory(p)) p /= "summary.json";
    if (!fs::exists(p)) throw ValidationError("missing run artifact: " + p.string());
    summaries.push_back(summary_from_json(read_text_file(p.string())));
  }
  std::size_t baseline = 0;
  for (std::size_t i = 0; i < summaries.size(); ++i)
    if (summaries[i].variant == "baseline") baseline = i;

  std::vector<ComparisonRow> rows;
  for (const auto& s : summaries)
    rows.push_back({s.variant, s.macro_f1_mean, s.macro_f1_std,
                    s.macro_f1_mean - summaries[baseline].macro_f1_mean});
  return rows;
}

std::string comparison_text(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-22s %14s %14s %18s\n", "variant", "macro_f1_mean",
                "macro_f1_std", "delta_vs_baseline");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-22s %14.6f %14.6f %+18.6f\n", r.variant.c_str(),
                  r.macro_f1_mean, r.macro_f1_std, r.delta_vs_baseline);
    out << line;
  }
  return out.str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "variant,macro_f1_mean,macro_f1_std,delta_vs_baseline\n";
  for (const auto& r : rows)
    out << r.variant << ',' << format_double(r.macro_f1_mean) << ','
        << format_double(r.macro_f1_std) << ',' << format_double(r.delta_vs_baseline) << '\n';
  return out.str();
}

}  // namespace semisup
