#include "embkit/clf_metrics.hpp"

#include "embkit/errors.hpp"
#include "embkit/kernels.hpp"
#include "embkit/parallel.hpp"
#include "embkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace embkit {

AlignmentScore alignment(const EmbeddingTable& table,
                         std::span<const std::uint32_t> labels,
                         std::span<const std::size_t> items,
                         const AlignmentOptions& options) {
  if (items.size() < 2)
    throw DomainError("alignment: need at least two labeled items");
  if (items.size() != labels.size())
    throw DomainError("alignment: label/item count mismatch");
  for (std::size_t idx : items)
    if (idx >= table.size())
      throw LookupError("alignment: item index out of range");

  AlignmentScore score;
  score.degenerate_labels =
      std::all_of(labels.begin(), labels.end(),
                  [&](std::uint32_t y) { return y == labels[0]; });

  const std::size_t n = items.size();
  double num_sum = 0.0;
  double den_sum = 0.0;

  if (n <= options.exact_item_limit) {
    score.pair_count = static_cast<std::uint64_t>(n) * (n - 1);
    // Chunked over anchor rows with an ordered fold, so the result is
    // identical for any thread count.
    const std::size_t grain = 16;
    num_sum = parallel_sum(0, n, grain, [&](std::size_t lo, std::size_t hi) {
      double acc = 0.0;
      for (std::size_t a = lo; a < hi; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          if (labels[a] == labels[b]) acc += kernel(table, items[a], items[b]);
        }
      return acc;
    });
    den_sum = parallel_sum(0, n, grain, [&](std::size_t lo, std::size_t hi) {
      double acc = 0.0;
      for (std::size_t a = lo; a < hi; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          const double k = kernel(table, items[a], items[b]);
          acc += k * k;
        }
      return acc;
    });
  } else {
    // Seeded uniform subsample of ordered pairs.
    score.sampled = true;
    score.pair_count = options.sample_pairs;
    Rng rng(derive_seed(options.seed, "alignment-pairs"));
    for (std::uint64_t s = 0; s < options.sample_pairs; ++s) {
      std::size_t a = rng.next_index(n);
      std::size_t b = rng.next_index(n);
      while (b == a) b = rng.next_index(n);
      const double k = kernel(table, items[a], items[b]);
      if (labels[a] == labels[b]) num_sum += k;
      den_sum += k * k;
    }
  }

  const double pairs = static_cast<double>(score.pair_count);
  score.numerator = num_sum / pairs;
  score.denominator = std::sqrt(den_sum / pairs);
  if (score.denominator <= 0.0)
    throw DegenerateError("alignment: zero kernel energy (all-zero embeddings)");
  score.value = score.numerator / score.denominator;
  return score;
}

ClassScores kernel_classifier_predict(const EmbeddingTable& table,
                                      std::span<const std::size_t> train_items,
                                      std::span<const std::uint32_t> train_labels,
                                      std::size_t num_classes,
                                      std::size_t query) {
  if (train_items.empty())
    throw DomainError("kernel classifier: empty training set");
  if (train_items.size() != train_labels.size())
    throw DomainError("kernel classifier: label/item count mismatch");
  if (num_classes == 0) throw DomainError("kernel classifier: no classes");

  // One-vs-rest +/-1 encoding: score_c = mean((y'==c ? +1 : -1) * k), which
  // folds to (2 * sum_{y'=c} k - sum k) / n.
  std::vector<double> class_sum(num_classes, 0.0);
  double total = 0.0;
  for (std::size_t t = 0; t < train_items.size(); ++t) {
    const std::uint32_t y = train_labels[t];
    if (y >= num_classes)
      throw DomainError("kernel classifier: label out of range");
    const double k = kernel(table, query, train_items[t]);
    class_sum[y] += k;
    total += k;
  }
  ClassScores out;
  out.scores.assign(num_classes, 0.0);
  const double inv = 1.0 / static_cast<double>(train_items.size());
  for (std::size_t c = 0; c < num_classes; ++c)
    out.scores[c] = (2.0 * class_sum[c] - total) * inv;

  std::size_t best = 0;
  for (std::size_t c = 1; c < num_classes; ++c)
    if (out.scores[c] > out.scores[best]) best = c; // ties keep smaller index
  out.predicted = static_cast<std::uint32_t>(best);
  return out;
}

std::vector<std::uint32_t> kernel_classifier_predict_batch(
    const EmbeddingTable& table, std::span<const std::size_t> train_items,
    std::span<const std::uint32_t> train_labels, std::size_t num_classes,
    std::span<const std::size_t> queries) {
  std::vector<std::uint32_t> out(queries.size(), 0);
  parallel_for(0, queries.size(), 16, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t q = lo; q < hi; ++q)
      out[q] = kernel_classifier_predict(table, train_items, train_labels,
                                         num_classes, queries[q])
                   .predicted;
  });
  return out;
}

F1Scores f1_scores(std::span<const std::uint32_t> predictions,
                   std::span<const std::uint32_t> truths) {
  if (truths.empty()) throw DomainError("f1_scores: empty input");
  if (predictions.size() != truths.size())
    throw DomainError("f1_scores: length mismatch");

  const std::uint32_t max_label = std::max(
      *std::max_element(truths.begin(), truths.end()),
      *std::max_element(predictions.begin(), predictions.end()));
  const std::size_t c = static_cast<std::size_t>(max_label) + 1;

  std::vector<std::int64_t> tp(c, 0), fp(c, 0), fn(c, 0);
  std::vector<bool> in_truths(c, false);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    in_truths[truths[i]] = true;
    if (predictions[i] == truths[i]) {
      ++tp[truths[i]];
    } else {
      ++fp[predictions[i]];
      ++fn[truths[i]];
    }
  }

  std::int64_t tp_all = 0, fp_all = 0, fn_all = 0;
  double macro_sum = 0.0;
  std::size_t macro_classes = 0;
  for (std::size_t k = 0; k < c; ++k) {
    if (!in_truths[k]) continue;
    ++macro_classes;
    tp_all += tp[k];
    fp_all += fp[k];
    fn_all += fn[k];
    const double denom = static_cast<double>(2 * tp[k] + fp[k] + fn[k]);
    macro_sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[k]) / denom : 0.0;
  }
  // Predictions of classes absent from truths still cost micro precision.
  for (std::size_t k = 0; k < c; ++k)
    if (!in_truths[k]) fp_all += fp[k];

  F1Scores f1;
  const double micro_denom = static_cast<double>(2 * tp_all + fp_all + fn_all);
  f1.micro = micro_denom > 0.0
                 ? 2.0 * static_cast<double>(tp_all) / micro_denom
                 : 0.0;
  f1.macro = macro_sum / static_cast<double>(macro_classes);
  return f1;
}

BoundCheckResult bound_check(const EmbeddingTable& table,
                             std::span<const std::uint32_t> labels,
                             std::span<const std::size_t> items, double delta,
                             unsigned resamples, std::uint64_t seed,
                             std::optional<std::uint32_t> positive_class) {
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("bound_check: delta must lie in (0, 1)");
  if (resamples == 0) throw DomainError("bound_check: resamples must be >= 1");
  if (items.size() < 4)
    throw DomainError("bound_check: need at least 4 items");
  if (items.size() != labels.size())
    throw DomainError("bound_check: label/item count mismatch");

  const std::uint32_t num_classes =
      *std::max_element(labels.begin(), labels.end()) + 1;
  if (num_classes > 2 && !positive_class)
    throw DomainError(
        "bound_check: non-binary labels need a designated positive class");
  const std::uint32_t positive = positive_class.value_or(0);

  // Fold to binary: designated class vs rest.
  std::vector<std::uint32_t> binary(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    binary[i] = labels[i] == positive ? 0 : 1;

  const double sqrt_delta = std::sqrt(delta);
  Rng rng(derive_seed(seed, "bound-check"));

  BoundCheckResult result;
  result.resamples = resamples;
  result.delta = delta;

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);

  for (unsigned r = 0; r < resamples; ++r) {
    rng.shuffle(order);
    const std::size_t half = items.size() / 2;

    std::vector<std::size_t> train_items, test_items;
    std::vector<std::uint32_t> train_labels, test_labels;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t k = order[i];
      if (i < half) {
        train_items.push_back(items[k]);
        train_labels.push_back(binary[k]);
      } else {
        test_items.push_back(items[k]);
        test_labels.push_back(binary[k]);
      }
    }

    const AlignmentScore train_alignment =
        alignment(table, train_labels, train_items);

    std::size_t errors = 0;
    for (std::size_t t = 0; t < test_items.size(); ++t) {
      const ClassScores pred = kernel_classifier_predict(
          table, train_items, train_labels, 2, test_items[t]);
      if (pred.predicted != test_labels[t]) ++errors;
    }
    const double risk =
        static_cast<double>(errors) / static_cast<double>(test_items.size());
    const double bound = 1.0 - train_alignment.value * sqrt_delta;

    result.mean_risk += risk;
    result.mean_bound += bound;
    if (risk <= bound) result.pass_fraction += 1.0;
  }

  result.mean_risk /= resamples;
  result.mean_bound /= resamples;
  result.pass_fraction /= resamples;
  return result;
}

} // namespace embkit
