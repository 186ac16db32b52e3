#include "embkit/simulator.hpp"

#include "embkit/errors.hpp"
#include "embkit/kernels.hpp"
#include "embkit/parallel.hpp"
#include "embkit/rng.hpp"
#include "embkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace embkit {

void SimConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw ValidationError("sim: lambda must lie in (0, 1)");
  if (catalog_size == 0 || dim == 0 || num_users == 0 || history_len == 0)
    throw ValidationError("sim: sizes must be >= 1");
  if (exposure_skew < 0.0)
    throw ValidationError("sim: exposure_skew must be >= 0");
  if (!(intent_strength > 0.0))
    throw ValidationError("sim: intent_strength must be positive");
}

std::vector<double> mixture_distribution(const EmbeddingTable& items,
                                         std::span<const double> p0,
                                         double lambda,
                                         std::span<const double> intent) {
  if (p0.size() != items.size())
    throw ValidationError("mixture: p0/catalog size mismatch");
  const std::size_t n = items.size();
  std::vector<double> probs(n);

  // exp(<phi(x), intent>) / Z with the max subtracted before exponentiation.
  double max_score = -1e300;
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = items.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) s += row[k] * intent[k];
    scores[i] = s;
    max_score = std::max(max_score, s);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = std::exp(scores[i] - max_score);
    z += scores[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    probs[i] = lambda * p0[i] + (1.0 - lambda) * scores[i] / z;
  return probs;
}

SimOutput simulate(const SimConfig& config) {
  config.validate();
  const std::size_t n = config.catalog_size;
  const std::size_t d = config.dim;

  // Ground-truth item embeddings: isotropic Gaussian, scaled to unit mean
  // norm.
  Rng item_rng(derive_seed(config.seed, "sim-items"));
  std::vector<double> data(n * d);
  for (double& v : data) v = item_rng.next_gaussian();
  double norm_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) sq += data[i * d + k] * data[i * d + k];
    norm_sum += std::sqrt(sq);
  }
  const double scale = static_cast<double>(n) / norm_sum;
  for (double& v : data) v *= scale;

  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back("item_" + std::to_string(i));

  SimOutput out{config,
                EmbeddingTable(std::move(ids), std::move(data), d),
                ExposureModel{},
                {},
                {},
                Matrix(config.num_users, d)};

  // Zipf exposure over the catalog in index order.
  out.exposure.p0.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.exposure.p0[i] =
        1.0 / std::pow(static_cast<double>(i + 1), config.exposure_skew);
    total += out.exposure.p0[i];
  }
  for (double& p : out.exposure.p0) p /= total;
  out.exposure.alpha = 1.0 / static_cast<double>(n);
  out.exposure.validate();

  out.histories.assign(config.num_users, {});
  out.truths.assign(config.num_users, 0);

  parallel_for(0, config.num_users, 16, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t u = lo; u < hi; ++u) {
      Rng rng(derive_seed(config.seed, "sim-user", u));

      // Intent direction uniform on the unit sphere; the sampling intent is
      // the direction times intent_strength.
      std::vector<double> intent(d);
      double sq = 0.0;
      do {
        sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          intent[k] = rng.next_gaussian();
          sq += intent[k] * intent[k];
        }
      } while (sq == 0.0);
      const double inv = 1.0 / std::sqrt(sq);
      for (std::size_t k = 0; k < d; ++k) {
        intent[k] *= inv;
        out.intents.at(u, k) = intent[k];
        intent[k] *= config.intent_strength;
      }

      const std::vector<double> probs = mixture_distribution(
          out.items, out.exposure.p0, config.lambda, intent);
      const AliasTable sampler(probs);

      auto& history = out.histories[u];
      history.reserve(config.history_len);
      for (std::size_t t = 0; t < config.history_len; ++t)
        history.push_back(static_cast<std::uint32_t>(sampler.sample(rng)));
      out.truths[u] = static_cast<std::uint32_t>(sampler.sample(rng));
    }
  });
  return out;
}

InteractionDataset SimOutput::to_dataset() const {
  if (config.history_len < 2)
    throw ValidationError("sim dataset: history_len must be >= 2");
  std::vector<std::string> users;
  users.reserve(histories.size());
  std::vector<std::vector<std::uint32_t>> sequences;
  sequences.reserve(histories.size());
  for (std::size_t u = 0; u < histories.size(); ++u) {
    users.push_back("user_" + std::to_string(u));
    std::vector<std::uint32_t> seq = histories[u];
    seq.push_back(truths[u]);
    sequences.push_back(std::move(seq));
  }
  return dataset_from_sequences(std::move(users), items.ids(),
                                std::move(sequences));
}

namespace {

struct UserOutcome {
  double cosine = 0.0;
  double mrr = 0.0; // only meaningful for rankable users
};

double cosine_to_intent(std::span<const double> vec,
                        std::span<const double> direction) {
  double dot = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < vec.size(); ++k) {
    dot += vec[k] * direction[k];
    sq += vec[k] * vec[k];
  }
  if (sq == 0.0) return 0.0;
  // direction is unit norm.
  return dot / std::sqrt(sq);
}

// Cosine plus full-catalog MRR (history excluded) for one aggregation.
UserOutcome evaluate_user(const SimOutput& sim, std::size_t user,
                          bool rankable, const std::vector<double>& seq_vector) {
  const EmbeddingTable& items = sim.items;
  const std::size_t n = items.size();

  UserOutcome outcome;
  outcome.cosine = cosine_to_intent(
      seq_vector,
      std::span<const double>(sim.intents.data.data() + user * sim.intents.cols,
                              sim.intents.cols));
  if (!rankable) return outcome;

  std::vector<double> scores(n);
  for (std::uint32_t c = 0; c < n; ++c) {
    const auto row = items.row(c);
    double acc = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k)
      acc += row[k] * seq_vector[k];
    scores[c] = acc;
  }
  const int ks[] = {10};
  outcome.mrr = rank_scores(scores, sim.truths[user], sim.histories[user], ks)
                    .reciprocal_rank;
  return outcome;
}

void paired_stats(std::span<const double> diffs, double* mean_out,
                  double* se_out) {
  *mean_out = mean(diffs);
  *se_out = sample_sd(diffs) / std::sqrt(static_cast<double>(diffs.size()));
}

} // namespace

RecoveryReport recovery_experiment(const SimOutput& sim,
                                   std::span<const double> alpha_grid) {
  if (alpha_grid.empty())
    throw DomainError("recovery: empty alpha grid");
  for (double a : alpha_grid)
    if (!(a > 0.0)) throw DomainError("recovery: alpha must be positive");

  const std::size_t users = sim.histories.size();
  const std::size_t d = sim.items.dim();

  // Users whose held-out item repeats inside the history cannot be ranked
  // once the history is excluded; they keep their cosine contribution.
  std::vector<bool> rankable(users, false);
  std::size_t ranked_users = 0;
  for (std::size_t u = 0; u < users; ++u) {
    const std::unordered_set<std::uint32_t> history(sim.histories[u].begin(),
                                                    sim.histories[u].end());
    rankable[u] = !history.contains(sim.truths[u]);
    ranked_users += rankable[u] ? 1 : 0;
  }
  if (ranked_users < 2)
    throw DegenerateError("recovery: fewer than 2 rankable users");

  // Unweighted baseline (alpha -> inf limit: all weights 1).
  std::vector<UserOutcome> baseline(users);
  parallel_for(0, users, 16, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t u = lo; u < hi; ++u) {
      std::vector<double> vec(d, 0.0);
      for (std::uint32_t item : sim.histories[u]) {
        const auto row = sim.items.row(item);
        for (std::size_t k = 0; k < d; ++k) vec[k] += row[k];
      }
      baseline[u] = evaluate_user(sim, u, rankable[u], vec);
    }
  });

  RecoveryReport report;
  report.total_users = users;
  report.ranked_users = ranked_users;
  report.unweighted.alpha = 0.0;
  report.unweighted.weighted = false;
  {
    std::vector<double> cosines, mrrs;
    for (std::size_t u = 0; u < users; ++u) {
      cosines.push_back(baseline[u].cosine);
      if (rankable[u]) mrrs.push_back(baseline[u].mrr);
    }
    report.unweighted.mean_cosine = mean(cosines);
    report.unweighted.mean_mrr = mean(mrrs);
  }

  for (double alpha : alpha_grid) {
    ExposureModel exposure = sim.exposure;
    exposure.alpha = alpha;

    std::vector<UserOutcome> outcomes(users);
    parallel_for(0, users, 16, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t u = lo; u < hi; ++u) {
        const SequenceEmbedding seq =
            sequence_embed(sim.items, sim.histories[u], exposure);
        outcomes[u] = evaluate_user(sim, u, rankable[u], seq.vector);
      }
    });

    RecoveryEntry entry;
    entry.alpha = alpha;
    std::vector<double> cosines, mrrs, cos_diffs, mrr_diffs;
    for (std::size_t u = 0; u < users; ++u) {
      cosines.push_back(outcomes[u].cosine);
      cos_diffs.push_back(outcomes[u].cosine - baseline[u].cosine);
      if (rankable[u]) {
        mrrs.push_back(outcomes[u].mrr);
        mrr_diffs.push_back(outcomes[u].mrr - baseline[u].mrr);
      }
    }
    entry.mean_cosine = mean(cosines);
    entry.mean_mrr = mean(mrrs);
    paired_stats(cos_diffs, &entry.cosine_diff_mean, &entry.cosine_diff_se);
    paired_stats(mrr_diffs, &entry.mrr_diff_mean, &entry.mrr_diff_se);
    report.weighted.push_back(entry);
  }

  report.best_by_mrr = 0;
  for (std::size_t i = 1; i < report.weighted.size(); ++i)
    if (report.weighted[i].mean_mrr >
        report.weighted[report.best_by_mrr].mean_mrr)
      report.best_by_mrr = i;
  return report;
}

} // namespace embkit
