#include "semisup/data.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "semisup/io.hpp"

namespace semisup {

long long ImbalanceSpec::total() const {
  return std::accumulate(per_class_counts.begin(), per_class_counts.end(), 0LL);
}

void validate(const ImbalanceSpec& spec) {
  require_config(spec.classes() >= 2, "imbalance spec needs at least 2 classes");
  for (int c : spec.per_class_counts)
    require_config(c >= 1, "imbalance spec counts must be >= 1");
}

void validate(const AugmentConfig& config) {
  require_config(config.weak_noise_sigma >= 0.0, "weak_noise_sigma must be >= 0");
  require_config(config.strong_noise_sigma >= config.weak_noise_sigma,
                 "strong_noise_sigma must be >= weak_noise_sigma");
  require_config(config.strong_dropout_prob >= 0.0 && config.strong_dropout_prob <= 1.0,
                 "strong_dropout_prob must be in [0,1]");
}

namespace {

RowVector random_unit_direction(int dim, Rng& rng) {
  RowVector v(dim);
  for (int j = 0; j < dim; ++j) v(j) = rng.normal();
  const double norm = v.norm();
  if (norm < 1e-12) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

void fill_cluster_row(Matrix& out, Eigen::Index row, const RowVector& mean, Rng& rng) {
  for (Eigen::Index j = 0; j < out.cols(); ++j) out(row, j) = mean(j) + rng.normal();
}

}  // namespace

SyntheticBench generate_synthetic(const ImbalanceSpec& spec, int dim, double class_sep,
                                  int unlabeled_count, int heldout_per_class,
                                  std::uint64_t seed) {
  validate(spec);
  require_config(dim >= 2, "feature dim must be >= 2");
  require_config(class_sep > 0.0, "class_sep must be > 0");
  require_config(unlabeled_count >= 0, "unlabeled_count must be >= 0");
  require_config(heldout_per_class >= 1, "heldout_per_class must be >= 1");

  const int k = spec.classes();
  Rng rng(seed);

  Matrix means(k, dim);
  for (int c = 0; c < k; ++c) means.row(c) = class_sep * random_unit_direction(dim, rng);

  SyntheticBench bench;

  Dataset& lab = bench.labeled;
  lab.class_count = k;
  lab.features.resize(spec.total(), dim);
  Eigen::Index row = 0;
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < spec.per_class_counts[c]; ++i) {
      fill_cluster_row(lab.features, row, means.row(c), rng);
      lab.labels.push_back(c);
      ++row;
    }

  Dataset& unl = bench.unlabeled;
  unl.class_count = k;
  unl.features.resize(unlabeled_count, dim);
  std::vector<double> cumulative(k);
  double acc = 0.0;
  for (int c = 0; c < k; ++c) {
    acc += double(spec.per_class_counts[c]) / double(spec.total());
    cumulative[c] = acc;
  }
  for (int i = 0; i < unlabeled_count; ++i) {
    const double u = rng.uniform();
    int c = 0;
    while (c + 1 < k && u >= cumulative[c]) ++c;
    fill_cluster_row(unl.features, i, means.row(c), rng);
    bench.unlabeled_truth.push_back(c);
  }

  Dataset& held = bench.heldout;
  held.class_count = k;
  held.features.resize(static_cast<Eigen::Index>(k) * heldout_per_class, dim);
  row = 0;
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < heldout_per_class; ++i) {
      fill_cluster_row(held.features, row, means.row(c), rng);
      held.labels.push_back(c);
      ++row;
    }

  return bench;
}

Dataset balanced_sample(const Dataset& labeled, int n_per_class, Rng& rng) {
  require_config(labeled.has_labels(), "balanced_sample: dataset has no labels");
  require_config(n_per_class >= 1, "balanced_sample: n_per_class must be >= 1");
  const int k = labeled.class_count;
  require_config(k >= 1, "balanced_sample: class_count not set");

  std::vector<std::vector<Eigen::Index>> by_class(k);
  for (Eigen::Index i = 0; i < labeled.size(); ++i) {
    const int l = labeled.labels[i];
    require_valid(l >= 0 && l < k, "balanced_sample: label out of range");
    by_class[l].push_back(i);
  }
  for (int c = 0; c < k; ++c)
    require_config(!by_class[c].empty(), "balanced_sample: class " + std::to_string(c) +
                                             " has no samples");

  Dataset out;
  out.class_count = k;
  out.features.resize(static_cast<Eigen::Index>(k) * n_per_class, labeled.dim());
  Eigen::Index row = 0;
  for (int c = 0; c < k; ++c) {
    std::vector<Eigen::Index>& pool = by_class[c];
    if (pool.size() >= static_cast<std::size_t>(n_per_class)) {
      // partial Fisher-Yates: first n_per_class entries become the draw
      for (int i = 0; i < n_per_class; ++i) {
        const std::size_t j = i + rng.bounded(pool.size() - i);
        std::swap(pool[i], pool[j]);
        out.features.row(row) = labeled.features.row(pool[i]);
        out.labels.push_back(c);
        ++row;
      }
    } else {
      for (int i = 0; i < n_per_class; ++i) {
        const Eigen::Index pick = pool[rng.bounded(pool.size())];
        out.features.row(row) = labeled.features.row(pick);
        out.labels.push_back(c);
        ++row;
      }
    }
  }
  return out;
}

RowVector weak_augment(const RowVector& x, const AugmentConfig& config, Rng& rng) {
  validate(config);
  RowVector out = x;
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out(j) += rng.normal(0.0, config.weak_noise_sigma);
  return out;
}

RowVector strong_augment(const RowVector& x, const AugmentConfig& config, Rng& rng) {
  validate(config);
  RowVector out = x;
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out(j) += rng.normal(0.0, config.strong_noise_sigma);
  for (Eigen::Index j = 0; j < out.size(); ++j)
    if (rng.uniform() < config.strong_dropout_prob) out(j) = 0.0;
  return out;
}

Matrix weak_augment_batch(const Matrix& x, const AugmentConfig& config, Rng& rng) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.row(i) = weak_augment(x.row(i), config, rng);
  return out;
}

Matrix strong_augment_batch(const Matrix& x, const AugmentConfig& config, Rng& rng) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.row(i) = strong_augment(x.row(i), config, rng);
  return out;
}

void save_dataset_csv(const Dataset& dataset, const std::string& path) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < dataset.dim(); ++j) {
    if (j) out << ',';
    out << 'f' << j;
  }
  if (dataset.has_labels()) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    for (Eigen::Index j = 0; j < dataset.dim(); ++j) {
      if (j) out << ',';
      out << format_double(dataset.features(i, j));
    }
    if (dataset.has_labels()) out << ',' << dataset.labels[i];
    out << '\n';
  }
  write_text_file(path, out.str());
}

Dataset load_dataset_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset CSV is empty: " + path);
  const auto header = split_csv_line(line);
  const bool has_label = !header.empty() && header.back() == "label";
  const int dim = static_cast<int>(header.size()) - (has_label ? 1 : 0);
  if (dim < 1) throw IoError("dataset CSV has no feature columns: " + path);

  std::vector<double> values;
  std::vector<int> labels;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != dim + (has_label ? 1 : 0))
      throw IoError("dataset CSV row has wrong arity: " + path);
    for (int j = 0; j < dim; ++j) values.push_back(parse_double(fields[j]));
    if (has_label) labels.push_back(static_cast<int>(parse_int(fields[dim])));
    ++rows;
  }

  Dataset d;
  d.features.resize(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (int j = 0; j < dim; ++j) d.features(i, j) = values[i * dim + j];
  d.labels = std::move(labels);
  d.class_count =
      d.has_labels() ? *std::max_element(d.labels.begin(), d.labels.end()) + 1 : 0;
  return d;
}

}  // namespace semisup
