#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here stays deliberately naive (triple loops, full sorts, hand-rolled
// elimination) so it cannot share a bug with the library paths it checks.

#include "embkit/dataset.hpp"
#include "embkit/embedding_table.hpp"
#include "embkit/linalg.hpp"
#include "embkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace testsupport {

inline embkit::EmbeddingTable make_table(
    const std::vector<std::vector<double>>& rows) {
  std::vector<std::string> ids;
  std::vector<double> data;
  const std::size_t dim = rows.at(0).size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ids.push_back("e" + std::to_string(i));
    for (double v : rows[i]) data.push_back(v);
  }
  return embkit::EmbeddingTable(std::move(ids), std::move(data), dim);
}

inline embkit::EmbeddingTable random_table(std::size_t n, std::size_t dim,
                                           std::uint64_t seed) {
  embkit::Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<double> data(n * dim);
  for (std::size_t i = 0; i < n; ++i) ids.push_back("e" + std::to_string(i));
  for (double& v : data) v = rng.next_gaussian();
  return embkit::EmbeddingTable(std::move(ids), std::move(data), dim);
}

// Independent dot product (the oracle never calls embkit::kernel).
inline double oracle_dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

// Naive O(n^2 d) triple-loop Gram.
inline embkit::Matrix naive_gram(const embkit::EmbeddingTable& table,
                                 const std::vector<std::size_t>& rows,
                                 const std::vector<std::size_t>& cols) {
  embkit::Matrix out(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out.at(a, b) = oracle_dot(table.row(rows[a]), table.row(cols[b]));
  return out;
}

struct OracleAlignment {
  double numerator = 0.0;
  double denominator = 0.0;
  double value = 0.0;
};

// Exhaustive ordered-pair enumeration of the alignment metric.
inline OracleAlignment alignment_oracle(const embkit::EmbeddingTable& table,
                                        const std::vector<std::uint32_t>& labels,
                                        const std::vector<std::size_t>& items) {
  double num = 0.0, den = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < items.size(); ++a) {
    for (std::size_t b = 0; b < items.size(); ++b) {
      if (a == b) continue;
      const double k = oracle_dot(table.row(items[a]), table.row(items[b]));
      if (labels[a] == labels[b]) num += k;
      den += k * k;
      ++pairs;
    }
  }
  OracleAlignment out;
  out.numerator = num / static_cast<double>(pairs);
  out.denominator = std::sqrt(den / static_cast<double>(pairs));
  out.value = out.numerator / out.denominator;
  return out;
}

struct OracleRank {
  std::size_t rank = 0;
  double mrr = 0.0;
  double ndcg = 0.0;
  bool hit_at_10 = false;
};

// Full-sort ranking oracle with the ascending-index tie rule.
inline OracleRank rank_oracle(const std::vector<double>& scores,
                              std::uint32_t truth,
                              const std::vector<std::uint32_t>& exclude) {
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t c = 0; c < scores.size(); ++c) {
    if (std::find(exclude.begin(), exclude.end(), c) != exclude.end())
      continue;
    candidates.push_back(c);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](std::uint32_t x, std::uint32_t y) {
              if (scores[x] != scores[y]) return scores[x] > scores[y];
              return x < y;
            });
  OracleRank out;
  const auto pos = std::find(candidates.begin(), candidates.end(), truth);
  if (pos == candidates.end()) throw std::runtime_error("truth excluded");
  out.rank = static_cast<std::size_t>(pos - candidates.begin()) + 1;
  out.mrr = 1.0 / static_cast<double>(out.rank);
  out.ndcg = 1.0 / std::log2(static_cast<double>(out.rank) + 1.0);
  out.hit_at_10 = out.rank <= 10;
  return out;
}

// Explicit ranking-score double loop: sum_i alpha/(p0_i + alpha) K(c, x_i).
inline double seq_score_oracle(const embkit::EmbeddingTable& table,
                               const std::vector<std::uint32_t>& history,
                               const std::vector<double>& p0, double alpha,
                               std::uint32_t candidate) {
  double acc = 0.0;
  for (std::uint32_t item : history)
    acc += alpha / (p0[item] + alpha) *
           oracle_dot(table.row(candidate), table.row(item));
  return acc;
}

// Hand-coded Gaussian elimination with partial pivoting (dense solve oracle).
inline std::vector<double> eliminate_oracle(std::vector<std::vector<double>> a,
                                            std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(a[i][k]) > std::fabs(a[pivot][k])) pivot = i;
    std::swap(a[k], a[pivot]);
    std::swap(b[k], b[pivot]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= a[ii][j] * x[j];
    x[ii] = acc / a[ii][ii];
  }
  return x;
}

// Clustered interaction corpus: items partitioned into clusters, users drawn
// mostly within one cluster. The cluster id doubles as the item label.
struct ClusteredCorpus {
  embkit::InteractionDataset dataset;
  std::vector<std::uint32_t> item_labels; // per dataset item index
  std::size_t num_clusters = 0;
};

inline ClusteredCorpus make_clustered_corpus(std::size_t num_items,
                                             std::size_t num_users,
                                             std::size_t num_clusters,
                                             std::size_t seq_len,
                                             double own_cluster_prob,
                                             std::uint64_t seed) {
  embkit::Rng rng(seed);
  std::vector<std::string> item_ids;
  std::vector<std::uint32_t> labels(num_items);
  for (std::size_t i = 0; i < num_items; ++i) {
    item_ids.push_back("item_" + std::to_string(i));
    labels[i] = static_cast<std::uint32_t>(i * num_clusters / num_items);
  }

  std::vector<std::vector<std::uint32_t>> members(num_clusters);
  for (std::uint32_t i = 0; i < num_items; ++i) members[labels[i]].push_back(i);

  std::vector<std::string> user_ids;
  std::vector<std::vector<std::uint32_t>> sequences;
  for (std::size_t u = 0; u < num_users; ++u) {
    user_ids.push_back("user_" + std::to_string(u));
    const std::size_t cluster = u % num_clusters;
    std::vector<std::uint32_t> seq;
    seq.reserve(seq_len);
    for (std::size_t t = 0; t < seq_len; ++t) {
      if (rng.next_double() < own_cluster_prob) {
        const auto& pool = members[cluster];
        seq.push_back(pool[rng.next_index(pool.size())]);
      } else {
        seq.push_back(static_cast<std::uint32_t>(rng.next_index(num_items)));
      }
    }
    sequences.push_back(std::move(seq));
  }

  ClusteredCorpus corpus;
  corpus.dataset = embkit::dataset_from_sequences(
      std::move(user_ids), std::move(item_ids), std::move(sequences));
  corpus.item_labels = std::move(labels);
  corpus.num_clusters = num_clusters;
  return corpus;
}

// Gaussian blob embeddings: `per_class` points around axis-aligned means
// `separation` apart, noise sigma per coordinate.
struct BlobData {
  embkit::EmbeddingTable table;
  std::vector<std::uint32_t> labels;
  std::vector<std::size_t> items; // 0..n-1
};

inline BlobData make_blobs(std::size_t classes, std::size_t per_class,
                           std::size_t dim, double separation, double sigma,
                           std::uint64_t seed) {
  if (classes > dim) throw std::runtime_error("make_blobs: classes > dim");
  embkit::Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<double> data;
  BlobData out;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t p = 0; p < per_class; ++p) {
      ids.push_back("b" + std::to_string(c) + "_" + std::to_string(p));
      out.labels.push_back(static_cast<std::uint32_t>(c));
      for (std::size_t k = 0; k < dim; ++k) {
        const double mean = (k == c) ? separation : 0.0;
        data.push_back(mean + sigma * rng.next_gaussian());
      }
    }
  }
  out.table = embkit::EmbeddingTable(std::move(ids), std::move(data), dim);
  out.items.resize(out.labels.size());
  std::iota(out.items.begin(), out.items.end(), 0);
  return out;
}

} // namespace testsupport
