#pragma once

#include "embkit/clf_metrics.hpp"
#include "embkit/embedding_table.hpp"
#include "embkit/sgns.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace embkit {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

// Seeded random 80/10/10 partition of 0..n-1.
SplitIndices split_80_10_10(std::size_t n, std::uint64_t seed);

// Full-batch gradient descent schedule shared by both heads.
struct HeadConfig {
  double learning_rate = 0.1;
  unsigned iterations = 500;
  double l2 = 1e-4;
};

struct HeadResult {
  F1Scores f1;
  std::vector<double> loss_trace; // per iteration
  std::vector<std::uint32_t> test_predictions;
};

// Full-batch softmax cross-entropy objective with l2 on the weights; fills
// the analytic gradients. Both heads step along exactly this gradient, so
// tests can difference it directly. features is n x dim row-major; weights
// and grad_weights are classes x dim.
double softmax_objective_grad(std::span<const double> features,
                              std::size_t dim,
                              std::span<const std::uint32_t> labels,
                              std::size_t classes,
                              std::span<const double> weights,
                              std::span<const double> bias, double l2,
                              std::span<double> grad_weights,
                              std::span<double> grad_bias);

/**
 * Linear head: multinomial logistic regression on the frozen embedding
 * coordinates (the heterogeneous configuration).
 */
HeadResult lr_head_fit(const EmbeddingTable& table,
                       std::span<const std::uint32_t> labels,
                       const SplitIndices& split, std::uint64_t seed,
                       const HeadConfig& config = {});
F1Scores lr_head_train_eval(const EmbeddingTable& table,
                            std::span<const std::uint32_t> labels,
                            const SplitIndices& split, std::uint64_t seed,
                            const HeadConfig& config = {});

/**
 * Inner-product head: one-vs-rest kernel logistic regression in representer
 * form, f_c(x) = sum_i beta_ci K_phi(x, x_i) + b_c. Decodes through inner
 * products only, so it is the homogeneous counterpart to the CL pretraining.
 */
HeadResult ip_head_fit(const EmbeddingTable& table,
                       std::span<const std::uint32_t> labels,
                       const SplitIndices& split, std::uint64_t seed,
                       const HeadConfig& config = {});
F1Scores ip_head_train_eval(const EmbeddingTable& table,
                            std::span<const std::uint32_t> labels,
                            const SplitIndices& split, std::uint64_t seed,
                            const HeadConfig& config = {});

/**
 * The controlled homogeneous-vs-heterogeneous experiment: per run, sample
 * class-constrained triplets, pretrain embeddings on them, then evaluate
 * both heads on a fresh 80/10/10 item split. Reports per-head means and
 * cross-run standard deviations.
 */
struct StructureReport {
  unsigned runs = 0;
  double lr_macro_mean = 0.0, lr_macro_sd = 0.0;
  double ip_macro_mean = 0.0, ip_macro_sd = 0.0;
  double lr_micro_mean = 0.0, lr_micro_sd = 0.0;
  double ip_micro_mean = 0.0, ip_micro_sd = 0.0;
  std::vector<double> per_run_lr_macro;
  std::vector<double> per_run_ip_macro;
};

StructureReport structure_experiment(std::span<const std::uint32_t> labels,
                                     const SgnsConfig& config, unsigned runs,
                                     std::size_t triplets_per_run = 0);

/**
 * One pretrained variant of the hyperparameter grid together with its
 * kernel-based metric and realized downstream metrics.
 */
struct EmbeddingVariant {
  std::string name;
  SgnsConfig config;
  EmbeddingTable table;
  double kernel_metric = 0.0;
  std::map<std::string, double> downstream_metrics;
};

struct CorrelationReport {
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n_variants = 0;
  std::pair<std::string, std::string> metric_pair;
};

// kernel_metric_name "kernel" reads EmbeddingVariant::kernel_metric; any
// other name is looked up in downstream_metrics on both sides.
CorrelationReport correlate(std::span<const EmbeddingVariant> variants,
                            const std::string& kernel_metric_name,
                            const std::string& downstream_metric_name);

} // namespace embkit
