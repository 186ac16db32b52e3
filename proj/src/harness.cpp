#include "embkit/harness.hpp"

#include "embkit/errors.hpp"
#include "embkit/kernels.hpp"
#include "embkit/rng.hpp"
#include "embkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace embkit {

SplitIndices split_80_10_10(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw DomainError("split: need at least 10 items");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "split-80-10-10"));
  rng.shuffle(order);

  SplitIndices split;
  const std::size_t train_end = (n * 8) / 10;
  const std::size_t valid_end = (n * 9) / 10;
  split.train.assign(order.begin(), order.begin() + train_end);
  split.valid.assign(order.begin() + train_end, order.begin() + valid_end);
  split.test.assign(order.begin() + valid_end, order.end());
  return split;
}

namespace {

std::size_t count_classes(std::span<const std::uint32_t> labels) {
  return static_cast<std::size_t>(
             *std::max_element(labels.begin(), labels.end())) +
         1;
}

void check_split(std::span<const std::uint32_t> labels,
                 const SplitIndices& split, std::size_t table_size) {
  if (labels.size() != table_size)
    throw ValidationError("head: labels must cover every table row");
  if (split.train.empty() || split.test.empty())
    throw DomainError("head: empty train or test split");
  std::unordered_set<std::uint32_t> train_classes;
  for (std::size_t i : split.train) {
    if (i >= table_size) throw LookupError("head: split index out of range");
    train_classes.insert(labels[i]);
  }
  if (train_classes.size() < 2)
    throw DomainError("head: single-class training set");
}

struct GdModel {
  std::vector<double> weights; // classes x dim
  std::vector<double> bias;    // classes
};

// Full-batch GD along softmax_objective_grad. Deterministic given the
// seeded init.
GdModel fit_softmax(std::span<const double> features, std::size_t dim,
                    std::span<const std::uint32_t> labels, std::size_t classes,
                    const HeadConfig& config, std::uint64_t seed,
                    std::vector<double>* loss_trace) {
  GdModel model;
  model.weights.assign(classes * dim, 0.0);
  model.bias.assign(classes, 0.0);
  Rng rng(derive_seed(seed, "head-init"));
  for (double& w : model.weights) w = 0.01 * rng.next_gaussian();

  std::vector<double> grad_w(classes * dim);
  std::vector<double> grad_b(classes);
  for (unsigned it = 0; it < config.iterations; ++it) {
    const double loss =
        softmax_objective_grad(features, dim, labels, classes, model.weights,
                               model.bias, config.l2, grad_w, grad_b);
    if (loss_trace) loss_trace->push_back(loss);
    for (std::size_t j = 0; j < model.weights.size(); ++j)
      model.weights[j] -= config.learning_rate * grad_w[j];
    for (std::size_t c = 0; c < classes; ++c)
      model.bias[c] -= config.learning_rate * grad_b[c];
  }
  return model;
}

std::uint32_t predict_softmax(const GdModel& model, const double* x,
                              std::size_t dim, std::size_t classes);

} // namespace

double softmax_objective_grad(std::span<const double> features,
                              std::size_t dim,
                              std::span<const std::uint32_t> labels,
                              std::size_t classes,
                              std::span<const double> weights,
                              std::span<const double> bias, double l2,
                              std::span<double> grad_weights,
                              std::span<double> grad_bias) {
  const std::size_t n = labels.size();
  if (n == 0) throw DomainError("softmax objective: empty input");
  if (features.size() != n * dim)
    throw DomainError("softmax objective: feature size mismatch");
  if (weights.size() != classes * dim || grad_weights.size() != weights.size())
    throw DomainError("softmax objective: weight size mismatch");

  std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
  std::vector<double> logits(classes);
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double* x = features.data() + i * dim;
    double max_logit = -1e300;
    for (std::size_t c = 0; c < classes; ++c) {
      double z = bias[c];
      const double* w = &weights[c * dim];
      for (std::size_t k = 0; k < dim; ++k) z += w[k] * x[k];
      logits[c] = z;
      max_logit = std::max(max_logit, z);
    }
    double norm = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      logits[c] = std::exp(logits[c] - max_logit);
      norm += logits[c];
    }
    const std::uint32_t y = labels[i];
    if (y >= classes) throw DomainError("softmax objective: label out of range");
    loss -= std::log(logits[y] / norm) * inv_n;
    for (std::size_t c = 0; c < classes; ++c) {
      const double delta = (logits[c] / norm - (c == y ? 1.0 : 0.0)) * inv_n;
      grad_bias[c] += delta;
      double* gw = &grad_weights[c * dim];
      for (std::size_t k = 0; k < dim; ++k) gw[k] += delta * x[k];
    }
  }

  double reg = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    reg += weights[j] * weights[j];
    grad_weights[j] += l2 * weights[j];
  }
  return loss + 0.5 * l2 * reg;
}

namespace {

std::uint32_t predict_softmax(const GdModel& model, const double* x,
                              std::size_t dim, std::size_t classes) {
  std::size_t best = 0;
  double best_z = -1e300;
  for (std::size_t c = 0; c < classes; ++c) {
    double z = model.bias[c];
    const double* w = &model.weights[c * dim];
    for (std::size_t k = 0; k < dim; ++k) z += w[k] * x[k];
    if (z > best_z) {
      best_z = z;
      best = c;
    }
  }
  return static_cast<std::uint32_t>(best);
}

} // namespace

HeadResult lr_head_fit(const EmbeddingTable& table,
                       std::span<const std::uint32_t> labels,
                       const SplitIndices& split, std::uint64_t seed,
                       const HeadConfig& config) {
  check_split(labels, split, table.size());
  const std::size_t dim = table.dim();
  const std::size_t classes = count_classes(labels);

  std::vector<double> features(split.train.size() * dim);
  std::vector<std::uint32_t> train_labels(split.train.size());
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    const auto row = table.row(split.train[i]);
    std::copy(row.begin(), row.end(), features.begin() + i * dim);
    train_labels[i] = labels[split.train[i]];
  }

  HeadResult result;
  const GdModel model = fit_softmax(features, dim, train_labels, classes,
                                    config, seed, &result.loss_trace);

  std::vector<std::uint32_t> truths;
  truths.reserve(split.test.size());
  for (std::size_t idx : split.test) {
    const auto row = table.row(idx);
    result.test_predictions.push_back(
        predict_softmax(model, row.data(), dim, classes));
    truths.push_back(labels[idx]);
  }
  result.f1 = f1_scores(result.test_predictions, truths);
  return result;
}

F1Scores lr_head_train_eval(const EmbeddingTable& table,
                            std::span<const std::uint32_t> labels,
                            const SplitIndices& split, std::uint64_t seed,
                            const HeadConfig& config) {
  return lr_head_fit(table, labels, split, seed, config).f1;
}

HeadResult ip_head_fit(const EmbeddingTable& table,
                       std::span<const std::uint32_t> labels,
                       const SplitIndices& split, std::uint64_t seed,
                       const HeadConfig& config) {
  check_split(labels, split, table.size());
  const std::size_t n = split.train.size();
  const std::size_t classes = count_classes(labels);

  // Representer features: x_i = (K(x_i, t_1), ..., K(x_i, t_n)).
  std::vector<double> features(n * n);
  std::vector<std::uint32_t> train_labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    train_labels[i] = labels[split.train[i]];
    for (std::size_t j = 0; j < n; ++j)
      features[i * n + j] = kernel(table, split.train[i], split.train[j]);
  }

  HeadResult result;
  const GdModel model = fit_softmax(features, n, train_labels, classes,
                                    config, seed, &result.loss_trace);

  std::vector<std::uint32_t> truths;
  truths.reserve(split.test.size());
  std::vector<double> k_query(n);
  for (std::size_t idx : split.test) {
    for (std::size_t j = 0; j < n; ++j)
      k_query[j] = kernel(table, idx, split.train[j]);
    result.test_predictions.push_back(
        predict_softmax(model, k_query.data(), n, classes));
    truths.push_back(labels[idx]);
  }
  result.f1 = f1_scores(result.test_predictions, truths);
  return result;
}

F1Scores ip_head_train_eval(const EmbeddingTable& table,
                            std::span<const std::uint32_t> labels,
                            const SplitIndices& split, std::uint64_t seed,
                            const HeadConfig& config) {
  return ip_head_fit(table, labels, split, seed, config).f1;
}

StructureReport structure_experiment(std::span<const std::uint32_t> labels,
                                     const SgnsConfig& config, unsigned runs,
                                     std::size_t triplets_per_run) {
  if (runs < 5) throw DomainError("structure_experiment: runs must be >= 5");
  const std::size_t num_items = labels.size();
  if (triplets_per_run == 0) triplets_per_run = 100 * num_items;

  StructureReport report;
  report.runs = runs;
  std::vector<double> lr_macro, ip_macro, lr_micro, ip_micro;

  // Each repetition is fully independent: fresh triplets, fresh training
  // stream, fresh item split. Averaging over split randomness gives the
  // steadier estimate of the head contrast than pinning one split.
  for (unsigned r = 0; r < runs; ++r) {
    const std::uint64_t run_seed = derive_seed(config.seed, "structure", r);
    const std::vector<Triplet> triplets =
        controlled_cl_sample(labels, triplets_per_run, run_seed);

    SgnsConfig run_config = config;
    run_config.seed = run_seed;
    const EmbeddingTable table =
        train_triplets(triplets, num_items, run_config);

    const SplitIndices split = split_80_10_10(num_items, run_seed);
    const F1Scores lr = lr_head_train_eval(table, labels, split, run_seed);
    const F1Scores ip = ip_head_train_eval(table, labels, split, run_seed);
    lr_macro.push_back(lr.macro);
    lr_micro.push_back(lr.micro);
    ip_macro.push_back(ip.macro);
    ip_micro.push_back(ip.micro);
  }

  report.per_run_lr_macro = lr_macro;
  report.per_run_ip_macro = ip_macro;
  report.lr_macro_mean = mean(lr_macro);
  report.lr_macro_sd = sample_sd(lr_macro);
  report.ip_macro_mean = mean(ip_macro);
  report.ip_macro_sd = sample_sd(ip_macro);
  report.lr_micro_mean = mean(lr_micro);
  report.lr_micro_sd = sample_sd(lr_micro);
  report.ip_micro_mean = mean(ip_micro);
  report.ip_micro_sd = sample_sd(ip_micro);
  return report;
}

CorrelationReport correlate(std::span<const EmbeddingVariant> variants,
                            const std::string& kernel_metric_name,
                            const std::string& downstream_metric_name) {
  if (variants.size() < 3)
    throw DomainError("correlate: need at least 3 variants");

  auto metric_of = [&](const EmbeddingVariant& v,
                       const std::string& name) -> double {
    if (name == "kernel") return v.kernel_metric;
    auto it = v.downstream_metrics.find(name);
    if (it == v.downstream_metrics.end())
      throw LookupError("correlate: variant '" + v.name +
                        "' lacks metric '" + name + "'");
    return it->second;
  };

  std::vector<double> x, y;
  x.reserve(variants.size());
  y.reserve(variants.size());
  for (const EmbeddingVariant& v : variants) {
    x.push_back(metric_of(v, kernel_metric_name));
    y.push_back(metric_of(v, downstream_metric_name));
  }

  CorrelationReport report;
  report.n_variants = variants.size();
  report.metric_pair = {kernel_metric_name, downstream_metric_name};
  report.pearson = pearson(x, y);
  report.spearman = spearman(x, y);
  return report;
}

} // namespace embkit
