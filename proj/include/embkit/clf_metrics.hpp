#pragma once

#include "embkit/embedding_table.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace embkit {

/**
 * Kernel target alignment between the embedding kernel and the label kernel
 * 1[y = y']:
 *
 *   value = mean_{i != j} K_Y(y_i, y_j) K_phi(i, j)
 *           / sqrt(mean_{i != j} K_phi(i, j)^2)
 *
 * Both means run over ordered pairs with the diagonal excluded (U-statistic:
 * the expectations are over independent draws, and the diagonal would inject
 * an O(1/n) bias with K_Y always 1 there).
 */
struct AlignmentScore {
  double value = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  std::uint64_t pair_count = 0;
  bool degenerate_labels = false; // all inputs share one label (K_Y == 1)
  bool sampled = false;           // pair subsampling was applied
};

struct AlignmentOptions {
  // Above this many items, ordered pairs are subsampled instead of
  // enumerated.
  std::size_t exact_item_limit = 20000;
  std::uint64_t sample_pairs = 10'000'000;
  std::uint64_t seed = 0x414c49474eULL;
};

// labels[k] is the class of items[k]. Throws DegenerateError when the
// denominator vanishes (all-zero embeddings).
AlignmentScore alignment(const EmbeddingTable& table,
                         std::span<const std::uint32_t> labels,
                         std::span<const std::size_t> items,
                         const AlignmentOptions& options = {});

/**
 * Mean-kernel classifier. One-vs-rest: per class c the score is the mean of
 * (+1 if y' = c else -1) * K_phi(query, x') over the training items; the
 * prediction is the argmax with ties broken toward the smallest class index.
 * For two classes this is exactly the sign of mean y' K_phi.
 */
struct ClassScores {
  std::uint32_t predicted = 0;
  std::vector<double> scores;
};

ClassScores kernel_classifier_predict(const EmbeddingTable& table,
                                      std::span<const std::size_t> train_items,
                                      std::span<const std::uint32_t> train_labels,
                                      std::size_t num_classes,
                                      std::size_t query);

// Batch form, parallel over queries.
std::vector<std::uint32_t> kernel_classifier_predict_batch(
    const EmbeddingTable& table, std::span<const std::size_t> train_items,
    std::span<const std::uint32_t> train_labels, std::size_t num_classes,
    std::span<const std::size_t> queries);

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

// Micro/macro F1 over the classes present in `truths`; a class with zero
// predicted and zero true positives contributes F1 = 0 to the macro average.
F1Scores f1_scores(std::span<const std::uint32_t> predictions,
                   std::span<const std::uint32_t> truths);

/**
 * Empirical check of the classifier risk bound
 *   risk <= 1 - value * sqrt(delta)        (with probability >= 1 - delta)
 * via repeated random half splits: train the mean-kernel classifier and the
 * alignment value on one half, measure 0-1 risk on the other, and report the
 * fraction of resamples where the bound holds.
 */
struct BoundCheckResult {
  double pass_fraction = 0.0;
  double mean_risk = 0.0;
  double mean_bound = 0.0;
  unsigned resamples = 0;
  double delta = 0.0;
};

// Labels must be binary; with more than two classes a positive class must be
// designated and the rest are folded into the negative class.
BoundCheckResult bound_check(const EmbeddingTable& table,
                             std::span<const std::uint32_t> labels,
                             std::span<const std::size_t> items, double delta,
                             unsigned resamples, std::uint64_t seed,
                             std::optional<std::uint32_t> positive_class = {});

} // namespace embkit
