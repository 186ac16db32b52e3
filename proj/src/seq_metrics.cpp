#include "embkit/seq_metrics.hpp"

#include "embkit/errors.hpp"
#include "embkit/kernels.hpp"
#include "embkit/linalg.hpp"
#include "embkit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace embkit {

void ExposureModel::validate() const {
  if (p0.empty()) throw ValidationError("exposure: empty p0");
  double total = 0.0;
  for (double p : p0) {
    if (!(p >= 0.0)) throw ValidationError("exposure: negative probability");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw ValidationError("exposure: p0 does not sum to 1");
  if (!(alpha > 0.0)) throw ValidationError("exposure: alpha must be positive");
}

ExposureModel build_exposure(std::span<const double> counts,
                             std::optional<double> alpha_override) {
  if (counts.empty()) throw DomainError("build_exposure: no items");
  double total = 0.0;
  std::vector<double> logs(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!(counts[i] >= 0.0))
      throw DomainError("build_exposure: negative count");
    logs[i] = std::log1p(counts[i]);
    total += logs[i];
  }
  if (total <= 0.0) throw DomainError("build_exposure: all counts are zero");

  ExposureModel model;
  model.p0.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) model.p0[i] = logs[i] / total;
  model.alpha = alpha_override ? *alpha_override
                               : 1.0 / static_cast<double>(counts.size());
  model.validate();
  return model;
}

ExposureModel build_exposure(std::span<const std::int64_t> counts,
                             std::optional<double> alpha_override) {
  std::vector<double> as_double(counts.begin(), counts.end());
  return build_exposure(std::span<const double>(as_double), alpha_override);
}

SequenceEmbedding sequence_embed(const EmbeddingTable& table,
                                 std::span<const std::uint32_t> history,
                                 const ExposureModel& exposure) {
  if (history.empty()) throw DomainError("sequence_embed: empty history");
  exposure.validate();

  SequenceEmbedding out;
  out.vector.assign(table.dim(), 0.0);
  out.weights.reserve(history.size());
  for (std::uint32_t item : history) {
    if (item >= exposure.p0.size())
      throw LookupError("sequence_embed: item outside exposure model");
    const double w = exposure.alpha / (exposure.p0[item] + exposure.alpha);
    out.weights.push_back(w);
    const auto row = table.row(item);
    for (std::size_t k = 0; k < row.size(); ++k) out.vector[k] += w * row[k];
  }
  return out;
}

namespace {

std::vector<double> scores_against_vector(
    const EmbeddingTable& table, std::span<const double> seq_vector,
    std::span<const std::uint32_t> candidates) {
  std::vector<double> scores(candidates.size(), 0.0);
  parallel_for(0, candidates.size(), 512, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      const auto row = table.row(candidates[c]);
      double acc = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k)
        acc += row[k] * seq_vector[k];
      scores[c] = acc;
    }
  });
  return scores;
}

} // namespace

std::vector<double> score_candidates(const EmbeddingTable& table,
                                     std::span<const std::uint32_t> history,
                                     const ExposureModel& exposure,
                                     std::span<const std::uint32_t> candidates) {
  if (candidates.empty()) return {};
  const SequenceEmbedding seq = sequence_embed(table, history, exposure);
  return scores_against_vector(table, seq.vector, candidates);
}

std::vector<double> score_candidates_unweighted(
    const EmbeddingTable& table, std::span<const std::uint32_t> history,
    std::span<const std::uint32_t> candidates) {
  if (history.empty())
    throw DomainError("score_candidates_unweighted: empty history");
  if (candidates.empty()) return {};
  std::vector<double> seq_vector(table.dim(), 0.0);
  for (std::uint32_t item : history) {
    const auto row = table.row(item);
    for (std::size_t k = 0; k < row.size(); ++k) seq_vector[k] += row[k];
  }
  return scores_against_vector(table, seq_vector, candidates);
}

RankingResult rank_scores(std::span<const double> catalog_scores,
                          std::uint32_t truth,
                          std::span<const std::uint32_t> exclude,
                          std::span<const int> ks) {
  if (truth >= catalog_scores.size())
    throw LookupError("rank_scores: truth outside catalog");
  std::unordered_set<std::uint32_t> excluded(exclude.begin(), exclude.end());
  if (excluded.contains(truth))
    throw DomainError("rank_scores: truth is excluded");

  const double truth_score = catalog_scores[truth];
  std::size_t better = 0;
  for (std::uint32_t c = 0; c < catalog_scores.size(); ++c) {
    if (c == truth || excluded.contains(c)) continue;
    if (catalog_scores[c] > truth_score ||
        (catalog_scores[c] == truth_score && c < truth))
      ++better;
  }

  RankingResult result;
  result.rank_of_truth = better + 1;
  result.reciprocal_rank = 1.0 / static_cast<double>(result.rank_of_truth);
  result.ndcg =
      1.0 / std::log2(static_cast<double>(result.rank_of_truth) + 1.0);
  result.hit_at.reserve(ks.size());
  for (int k : ks)
    result.hit_at.emplace_back(
        k, result.rank_of_truth <= static_cast<std::size_t>(k));
  return result;
}

RankingResult rank_and_measure(const EmbeddingTable& table,
                               std::span<const std::uint32_t> history,
                               const ExposureModel& exposure,
                               std::uint32_t truth,
                               std::span<const std::uint32_t> exclude,
                               std::span<const int> ks) {
  if (truth >= table.size())
    throw LookupError("rank_and_measure: truth lacks an embedding");
  std::vector<std::uint32_t> catalog(table.size());
  for (std::uint32_t i = 0; i < table.size(); ++i) catalog[i] = i;
  const std::vector<double> scores =
      score_candidates(table, history, exposure, catalog);
  return rank_scores(scores, truth, exclude, ks);
}

double sequence_kernel(const EmbeddingTable& table,
                       std::span<const std::uint32_t> s,
                       std::span<const std::uint32_t> s_prime) {
  if (s.size() != s_prime.size())
    throw DomainError("sequence_kernel: length mismatch");
  if (s.empty()) throw DomainError("sequence_kernel: empty sequences");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    acc += kernel(table, s[i], s_prime[i]);
  return acc;
}

double sequence_ridge_predict(
    const EmbeddingTable& table,
    const std::vector<std::vector<std::uint32_t>>& train_sequences,
    std::span<const double> targets, double ridge,
    std::span<const std::uint32_t> query_sequence) {
  if (train_sequences.empty())
    throw DomainError("sequence_ridge: no training sequences");
  if (train_sequences.size() != targets.size())
    throw DomainError("sequence_ridge: target count mismatch");
  if (ridge < 0.0) throw DomainError("sequence_ridge: negative ridge");
  const std::size_t len = query_sequence.size();
  for (const auto& seq : train_sequences)
    if (seq.size() != len)
      throw DomainError("sequence_ridge: sequence length mismatch");

  const std::size_t n = train_sequences.size();
  Matrix gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double value =
          sequence_kernel(table, train_sequences[i], train_sequences[j]);
      gram.at(i, j) = value;
      gram.at(j, i) = value;
    }
  }
  for (std::size_t i = 0; i < n; ++i) gram.at(i, i) += ridge;

  if (ridge == 0.0 && condition_1norm(gram) > 1e12)
    throw IllConditionedError(
        "sequence_ridge: singular sequence Gram with ridge=0");

  const std::vector<double> coeffs =
      solve_linear(gram, std::vector<double>(targets.begin(), targets.end()));

  double prediction = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    prediction +=
        coeffs[i] * sequence_kernel(table, query_sequence, train_sequences[i]);
  return prediction;
}

SeqEvalSummary evaluate_sequences(const EmbeddingTable& table,
                                  const InteractionDataset& dataset,
                                  const ExposureModel& exposure,
                                  std::span<const int> ks, SeqScorer scorer,
                                  bool use_test_split) {
  if (table.size() != dataset.num_items())
    throw ValidationError("evaluate_sequences: table/catalog size mismatch");

  const std::size_t users = dataset.num_users();
  std::vector<RankingResult> results(users);

  // The user loop is the parallel unit; per-user scoring stays sequential.
  parallel_for(0, users, 8, [&](std::size_t lo, std::size_t hi) {
    const std::size_t dim = table.dim();
    std::vector<double> seq_vector(dim);
    std::vector<double> scores(table.size());
    for (std::size_t u = lo; u < hi; ++u) {
      const auto& seq = dataset.sequences[u];
      const std::size_t cut = use_test_split ? seq.size() - 1 : seq.size() - 2;
      const std::span<const std::uint32_t> history(seq.data(), cut);
      const std::uint32_t truth = seq[cut];

      std::fill(seq_vector.begin(), seq_vector.end(), 0.0);
      switch (scorer) {
        case SeqScorer::kExposureWeighted: {
          const SequenceEmbedding e = sequence_embed(table, history, exposure);
          seq_vector = e.vector;
          break;
        }
        case SeqScorer::kUnweightedMean:
          for (std::uint32_t item : history) {
            const auto row = table.row(item);
            for (std::size_t k = 0; k < dim; ++k) seq_vector[k] += row[k];
          }
          break;
        case SeqScorer::kLastItem: {
          const auto row = table.row(history.back());
          for (std::size_t k = 0; k < dim; ++k) seq_vector[k] = row[k];
          break;
        }
      }
      for (std::uint32_t c = 0; c < table.size(); ++c) {
        const auto row = table.row(c);
        double acc = 0.0;
        for (std::size_t k = 0; k < dim; ++k) acc += row[k] * seq_vector[k];
        scores[c] = acc;
      }

      std::vector<std::uint32_t> exclude(history.begin(), history.end());
      std::erase(exclude, truth);
      results[u] = rank_scores(scores, truth, exclude, ks);
    }
  });

  SeqEvalSummary summary;
  summary.users = users;
  summary.hit_at.reserve(ks.size());
  for (int k : ks) summary.hit_at.emplace_back(k, 0.0);
  for (const RankingResult& r : results) {
    summary.mrr += r.reciprocal_rank;
    summary.ndcg += r.ndcg;
    for (std::size_t i = 0; i < r.hit_at.size(); ++i)
      summary.hit_at[i].second += r.hit_at[i].second ? 1.0 : 0.0;
  }
  if (users > 0) {
    summary.mrr /= static_cast<double>(users);
    summary.ndcg /= static_cast<double>(users);
    for (auto& [k, v] : summary.hit_at) v /= static_cast<double>(users);
  }
  return summary;
}

} // namespace embkit
