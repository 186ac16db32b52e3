#pragma once

#include "embkit/dataset.hpp"
#include "embkit/embedding_table.hpp"
#include "embkit/linalg.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace embkit {

/**
 * Item2vec-style contrastive trainer over behavior sequences.
 *
 * Positives are all (center, context) pairs within `window` of each other in
 * a user's train sequence; each positive draws `negatives` independent
 * negatives from the unigram^0.75 distribution over train counts. The loss
 * per (center, positive, negative) is the pairwise softmax
 *   -log( e^{s+} / (e^{s+} + e^{s-}) ) = -log sigmoid(s+ - s-),
 * with separate center (input) and context (output) matrices; the input
 * matrix is exported.
 *
 * Training is single-writer and fully deterministic given (data, seed):
 * pairs are reshuffled once per epoch from the run stream, updates are
 * applied batch-by-batch in order.
 */
struct SgnsConfig {
  std::size_t dim = 32;
  unsigned window = 3;
  unsigned negatives = 3;
  double learning_rate = 0.005;
  std::size_t batch_size = 256;
  double l2 = 1e-6;
  unsigned max_epochs = 100;
  double early_stop_delta = 1e-6;
  unsigned early_stop_patience = 3;
  bool use_rmsprop = true; // plain SGD when false
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  std::uint64_t seed = 42;

  void validate() const;
};

struct TrainLog {
  std::vector<double> epoch_loss;     // mean triplet loss per epoch
  std::vector<double> epoch_accuracy; // fraction of positives scored above
                                      // their paired negative
  bool early_stopped = false;
};

// Triplet softmax loss and its analytic gradients; the exact computation the
// trainer applies, exposed so tests can difference it.
struct TripletGrad {
  double loss = 0.0;
  std::vector<double> d_anchor;
  std::vector<double> d_positive;
  std::vector<double> d_negative;
};
TripletGrad triplet_loss_grad(std::span<const double> anchor,
                              std::span<const double> positive,
                              std::span<const double> negative);

EmbeddingTable train(const InteractionDataset& data, const SgnsConfig& config,
                     TrainLog* log = nullptr);

struct Triplet {
  std::uint32_t anchor = 0;
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;
};

// Controlled contrastive sampler: anchors uniform over items, positives from
// the anchor's class, negatives from other classes. Requires >= 2 classes,
// each with >= 2 members.
std::vector<Triplet> controlled_cl_sample(std::span<const std::uint32_t> labels,
                                          std::size_t n, std::uint64_t seed);

// Same objective and schedule as train(), with explicit triplets as the data
// unit (negatives are taken from the triplets, not resampled).
EmbeddingTable train_triplets(std::span<const Triplet> triplets,
                              std::size_t num_items, const SgnsConfig& config,
                              const std::vector<std::string>* ids = nullptr,
                              TrainLog* log = nullptr);

/**
 * Multi-run variability of the pretrained coordinates versus their inner
 * products. Coordinate SDs are taken entrywise across runs; kernel SDs over
 * a fixed random sample of item pairs. Rank correlations between runs are
 * reported for both views, plus the coordinate SD after optimal orthogonal
 * (Procrustes) alignment of every run to run 0.
 */
struct StabilityReport {
  unsigned run_count = 0;
  Matrix per_entry_sd;                               // entities x dim
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sampled_pairs;
  std::vector<double> per_pair_kernel_sd;
  double mean_coordinate_sd = 0.0;
  double mean_abs_coordinate = 0.0;
  double coordinate_rank_corr = 0.0; // mean over run pairs
  double kernel_rank_corr = 0.0;     // mean over run pairs
  double aligned_mean_coordinate_sd = 0.0;
};

// Trains `runs` independent repetitions with seeds config.seed + 0..runs-1
// (runs may execute in parallel; each owns its table and stream).
StabilityReport stability_study(const InteractionDataset& data,
                                const SgnsConfig& config, unsigned runs,
                                std::size_t kernel_pair_sample = 1000);

// Aggregation core, usable with externally produced tables.
StabilityReport stability_from_tables(const std::vector<EmbeddingTable>& tables,
                                      std::uint64_t pair_seed,
                                      std::size_t kernel_pair_sample = 1000);

} // namespace embkit
