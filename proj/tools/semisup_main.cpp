#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semisup/experiment.hpp"
#include "semisup/io.hpp"
#include "semisup/smoothing.hpp"
#include "semisup/types.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

struct RunOptions {
  std::string config_path;
  std::string variant;
  std::string out_dir;
  std::int64_t seed = -1;
  int epochs = -1;
};

int do_run(const RunOptions& opt) {
  semisup::ExperimentConfig config =
      opt.config_path.empty() ? semisup::ExperimentConfig{} : semisup::load_config(opt.config_path);
  // flags override file values
  if (!opt.variant.empty()) config.variant = semisup::variant_from_string(opt.variant);
  if (!opt.out_dir.empty()) config.output_dir = opt.out_dir;
  if (opt.seed >= 0) config.seeds = {static_cast<std::uint64_t>(opt.seed)};
  if (opt.epochs >= 0) config.train.epochs = opt.epochs;
  semisup::validate(config);

  const semisup::ExperimentSummary summary = semisup::run_experiment(config);
  std::printf("%s: macro_f1 %.4f +- %.4f over %zu seed(s); artifacts in %s\n",
              summary.variant.c_str(), summary.macro_f1_mean, summary.macro_f1_std,
              summary.seeds.size(), summary.directory.c_str());
  return kExitOk;
}

int do_compare(const std::vector<std::string>& paths, const std::string& csv_path) {
  const auto rows = semisup::compare_variants(paths);
  std::fputs(semisup::comparison_text(rows).c_str(), stdout);
  if (!csv_path.empty()) {
    semisup::write_text_file(csv_path, semisup::comparison_csv(rows));
    std::printf("wrote %s\n", csv_path.c_str());
  }
  return kExitOk;
}

int do_smooth(const std::string& input, const std::string& output, int window) {
  semisup::LabelSequence seq = semisup::load_labels_csv(input);
  semisup::save_labels_csv(semisup::smooth(seq, window), output);
  std::printf("smoothed %zu frames (window %d) -> %s\n", seq.size(), window, output.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semisup: semi-supervised classification lab on synthetic imbalanced data"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand(
      "run", "Train one experiment variant over its seed list and write artifacts");
  run->add_option("--config", run_opt.config_path, "JSON config file (defaults when omitted)");
  run->add_option("--variant", run_opt.variant,
                  "baseline | ssl_fixed_threshold | ssl_dtm | ssl_dtm_post");
  run->add_option("--out", run_opt.out_dir, "output directory");
  run->add_option("--seed", run_opt.seed, "single seed overriding the config's seed list");
  run->add_option("--epochs", run_opt.epochs, "override epoch count");

  std::vector<std::string> compare_paths;
  std::string compare_csv_path;
  CLI::App* compare =
      app.add_subcommand("compare", "Tabulate completed runs (summary.json files or run dirs)");
  compare->add_option("summaries", compare_paths, "summary.json paths or variant directories")
      ->required();
  compare->add_option("--csv", compare_csv_path, "also write the table as CSV");

  std::string smooth_in, smooth_out;
  int smooth_window = 10;
  CLI::App* smooth = app.add_subcommand("smooth", "Majority-vote smooth a label-sequence CSV");
  smooth->add_option("--input", smooth_in, "input CSV (segment_id,frame_index,label)")
      ->required();
  smooth->add_option("--output", smooth_out, "output CSV")->required();
  smooth->add_option("--window", smooth_window, "window size (default 10)");

  std::string config_path;
  CLI::App* config_cmd =
      app.add_subcommand("config", "Print the effective experiment config as JSON");
  config_cmd->add_option("--config", config_path, "JSON config file (defaults when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (run->parsed()) return do_run(run_opt);
    if (compare->parsed()) return do_compare(compare_paths, compare_csv_path);
    if (smooth->parsed()) return do_smooth(smooth_in, smooth_out, smooth_window);
    if (config_cmd->parsed()) {
      const semisup::ExperimentConfig config = config_path.empty()
                                                   ? semisup::ExperimentConfig{}
                                                   : semisup::load_config(config_path);
      std::fputs(semisup::config_to_json(config).c_str(), stdout);
      return kExitOk;
    }
  } catch (const semisup::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntimeError;
  }
  return kExitConfigError;
}
