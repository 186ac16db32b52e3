#pragma once

#include "embkit/dataset.hpp"
#include "embkit/embedding_table.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace embkit {

/**
 * Per-item exposure probabilities plus the mixing constant that governs the
 * history discount weights alpha / (p0 + alpha).
 */
struct ExposureModel {
  std::vector<double> p0; // sums to 1
  double alpha = 0.0;

  void validate() const;
};

// Log-popularity proxy: p0[i] = log(1 + counts[i]) / sum_j log(1 + counts[j]).
// alpha defaults to the average exposure probability (1 / num items).
ExposureModel build_exposure(std::span<const double> counts,
                             std::optional<double> alpha_override = {});
ExposureModel build_exposure(std::span<const std::int64_t> counts,
                             std::optional<double> alpha_override = {});

/**
 * Maximum-likelihood sequence representation: the exposure-discounted sum
 *   vector = sum_i alpha/(p0(x_i) + alpha) * phi(x_i).
 * More exposed history items get strictly smaller weights; no normalization
 * is applied to the result.
 */
struct SequenceEmbedding {
  std::vector<double> vector;
  std::vector<double> weights; // per history item, each in (0, 1]
};

SequenceEmbedding sequence_embed(const EmbeddingTable& table,
                                 std::span<const std::uint32_t> history,
                                 const ExposureModel& exposure);

// Relevance of each candidate to the history: <phi(candidate), vector>.
// Algebraically identical to the weighted kernel sum over history items.
std::vector<double> score_candidates(const EmbeddingTable& table,
                                     std::span<const std::uint32_t> history,
                                     const ExposureModel& exposure,
                                     std::span<const std::uint32_t> candidates);

// Unweighted variant (every history weight forced to 1); the alpha -> inf
// limit used as the control in the recovery experiment.
std::vector<double> score_candidates_unweighted(
    const EmbeddingTable& table, std::span<const std::uint32_t> history,
    std::span<const std::uint32_t> candidates);

/**
 * Full-catalog rank of one held-out item. Unsampled: every candidate not in
 * the exclusion set competes. Ties are broken by ascending item index.
 */
struct RankingResult {
  std::size_t rank_of_truth = 0; // 1-based
  double reciprocal_rank = 0.0;  // 1 / rank
  double ndcg = 0.0;             // 1 / log2(rank + 1)
  std::vector<std::pair<int, bool>> hit_at;
};

RankingResult rank_and_measure(const EmbeddingTable& table,
                               std::span<const std::uint32_t> history,
                               const ExposureModel& exposure,
                               std::uint32_t truth,
                               std::span<const std::uint32_t> exclude,
                               std::span<const int> ks);

// Same protocol with precomputed candidate scores (both scoring modes rank
// through this).
RankingResult rank_scores(std::span<const double> catalog_scores,
                          std::uint32_t truth,
                          std::span<const std::uint32_t> exclude,
                          std::span<const int> ks);

// Position-aligned sequence kernel of two equal-length item lists:
// sum_i kernel(s[i], s_prime[i]).
double sequence_kernel(const EmbeddingTable& table,
                       std::span<const std::uint32_t> s,
                       std::span<const std::uint32_t> s_prime);

// Kernel ridge regression with the sequence kernel as Gram: prediction =
// k_q^T (K + ridge I)^-1 y. ridge = 0 requires a well-conditioned K
// (1-norm condition estimate <= 1e12).
double sequence_ridge_predict(
    const EmbeddingTable& table,
    const std::vector<std::vector<std::uint32_t>>& train_sequences,
    std::span<const double> targets, double ridge,
    std::span<const std::uint32_t> query_sequence);

// How the per-user sequence score is formed during dataset evaluation.
enum class SeqScorer {
  kExposureWeighted, // the kernel-sum ranking score
  kUnweightedMean,   // plain mean of history embeddings
  kLastItem,         // similarity to the most recent item only
};

struct SeqEvalSummary {
  double mrr = 0.0;
  double ndcg = 0.0;
  std::vector<std::pair<int, double>> hit_at;
  std::size_t users = 0;
};

// Leave-last-out evaluation over every user: the held-out item (test split,
// or validation split when use_test_split is false) is ranked against the
// full catalog minus the user's history.
SeqEvalSummary evaluate_sequences(const EmbeddingTable& table,
                                  const InteractionDataset& dataset,
                                  const ExposureModel& exposure,
                                  std::span<const int> ks,
                                  SeqScorer scorer = SeqScorer::kExposureWeighted,
                                  bool use_test_split = true);

} // namespace embkit
