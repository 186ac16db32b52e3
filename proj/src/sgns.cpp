#include "embkit/sgns.hpp"

#include "embkit/errors.hpp"
#include "embkit/kernels.hpp"
#include "embkit/parallel.hpp"
#include "embkit/rng.hpp"
#include "embkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace embkit {

void SgnsConfig::validate() const {
  if (dim == 0) throw ValidationError("sgns: dim must be >= 1");
  if (window == 0) throw ValidationError("sgns: window must be >= 1");
  if (negatives == 0) throw ValidationError("sgns: negatives must be >= 1");
  if (!(learning_rate > 0.0))
    throw ValidationError("sgns: learning_rate must be positive");
  if (batch_size == 0) throw ValidationError("sgns: batch_size must be >= 1");
  if (l2 < 0.0) throw ValidationError("sgns: l2 must be >= 0");
  if (max_epochs == 0) throw ValidationError("sgns: max_epochs must be >= 1");
  if (early_stop_delta < 0.0)
    throw ValidationError("sgns: early_stop_delta must be >= 0");
}

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
} // namespace

TripletGrad triplet_loss_grad(std::span<const double> anchor,
                              std::span<const double> positive,
                              std::span<const double> negative) {
  const std::size_t d = anchor.size();
  if (positive.size() != d || negative.size() != d)
    throw DomainError("triplet_loss_grad: dimension mismatch");

  double margin = 0.0;
  for (std::size_t k = 0; k < d; ++k)
    margin += anchor[k] * (positive[k] - negative[k]);

  TripletGrad g;
  // -log sigmoid(margin); written via log1p for large |margin|.
  g.loss = margin >= 0.0 ? std::log1p(std::exp(-margin))
                         : -margin + std::log1p(std::exp(margin));
  const double coeff = sigmoid(margin) - 1.0; // d loss / d margin
  g.d_anchor.resize(d);
  g.d_positive.resize(d);
  g.d_negative.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    g.d_anchor[k] = coeff * (positive[k] - negative[k]);
    g.d_positive[k] = coeff * anchor[k];
    g.d_negative[k] = -coeff * anchor[k];
  }
  return g;
}

namespace {

// Single-writer trainer state over separate input (center) and output
// (context) matrices. Weight decay is folded into a global scale factor so a
// batch costs O(touched rows), not O(table).
class Trainer {
public:
  Trainer(std::size_t num_items, const SgnsConfig& config, Rng& rng)
      : cfg_(config),
        n_(num_items),
        d_(config.dim),
        in_(num_items * config.dim),
        out_(num_items * config.dim),
        acc_in_(num_items * config.dim, 0.0),
        acc_out_(num_items * config.dim, 0.0),
        slot_in_(num_items, -1),
        slot_out_(num_items, -1) {
    // Glorot-style uniform on +-sqrt(6 / (d + d)) per coordinate.
    const double bound = std::sqrt(6.0 / (2.0 * static_cast<double>(d_)));
    for (double& v : in_) v = (2.0 * rng.next_double() - 1.0) * bound;
    for (double& v : out_) v = (2.0 * rng.next_double() - 1.0) * bound;
  }

  // One (center, positive, negative) term. Returns (loss, correct).
  std::pair<double, bool> accumulate(std::uint32_t center,
                                     std::uint32_t positive,
                                     std::uint32_t negative) {
    const double* a = &in_[center * d_];
    const double* p = &out_[positive * d_];
    const double* q = &out_[negative * d_];

    double raw_margin = 0.0;
    for (std::size_t k = 0; k < d_; ++k) raw_margin += a[k] * (p[k] - q[k]);
    // Actual parameters are scale_ * stored, so the margin picks up scale_^2.
    const double margin = raw_margin * scale_ * scale_;
    const double loss = margin >= 0.0
                            ? std::log1p(std::exp(-margin))
                            : -margin + std::log1p(std::exp(margin));
    const double coeff = (sigmoid(margin) - 1.0) * scale_;

    // Resolve all slots before taking pointers: an insertion can reallocate
    // the gradient buffers.
    const std::size_t sa = grad_slot(slot_in_, touched_in_, grads_in_, center);
    const std::size_t sp =
        grad_slot(slot_out_, touched_out_, grads_out_, positive);
    const std::size_t sq =
        grad_slot(slot_out_, touched_out_, grads_out_, negative);
    double* ga = &grads_in_[sa * d_];
    double* gp = &grads_out_[sp * d_];
    double* gq = &grads_out_[sq * d_];
    for (std::size_t k = 0; k < d_; ++k) {
      ga[k] += coeff * (p[k] - q[k]);
      gp[k] += coeff * a[k];
      gq[k] -= coeff * a[k];
    }
    ++terms_;
    return {loss, margin > 0.0};
  }

  void apply_batch() {
    if (terms_ == 0) return;
    const double inv_terms = 1.0 / static_cast<double>(terms_);
    apply_rows(slot_in_, touched_in_, grads_in_, in_, acc_in_, inv_terms);
    apply_rows(slot_out_, touched_out_, grads_out_, out_, acc_out_, inv_terms);
    terms_ = 0;
    // Decoupled per-batch weight decay on every row of both matrices.
    scale_ *= 1.0 - cfg_.learning_rate * cfg_.l2;
  }

  EmbeddingTable export_table(const std::vector<std::string>* ids) const {
    std::vector<double> data(in_.size());
    for (std::size_t i = 0; i < in_.size(); ++i) data[i] = in_[i] * scale_;
    std::vector<std::string> names;
    if (ids) {
      names = *ids;
    } else {
      names.reserve(n_);
      for (std::size_t i = 0; i < n_; ++i)
        names.push_back("item_" + std::to_string(i));
    }
    return EmbeddingTable(std::move(names), std::move(data), d_);
  }

private:
  std::size_t grad_slot(std::vector<std::int64_t>& slots,
                        std::vector<std::uint32_t>& touched,
                        std::vector<double>& grads, std::uint32_t row) {
    if (slots[row] < 0) {
      slots[row] = static_cast<std::int64_t>(touched.size());
      touched.push_back(row);
      grads.resize(touched.size() * d_, 0.0);
    }
    return static_cast<std::size_t>(slots[row]);
  }

  void apply_rows(std::vector<std::int64_t>& slots,
                  std::vector<std::uint32_t>& touched,
                  std::vector<double>& grads, std::vector<double>& weights,
                  std::vector<double>& accums, double inv_terms) {
    for (std::size_t s = 0; s < touched.size(); ++s) {
      const std::uint32_t row = touched[s];
      double* w = &weights[row * d_];
      double* acc = &accums[row * d_];
      const double* g = &grads[s * d_];
      for (std::size_t k = 0; k < d_; ++k) {
        const double grad = g[k] * inv_terms;
        double step;
        if (cfg_.use_rmsprop) {
          acc[k] = cfg_.rmsprop_decay * acc[k] +
                   (1.0 - cfg_.rmsprop_decay) * grad * grad;
          step = cfg_.learning_rate * grad /
                 (std::sqrt(acc[k]) + cfg_.rmsprop_epsilon);
        } else {
          step = cfg_.learning_rate * grad;
        }
        // The step is in actual-parameter space; stored values carry 1/scale.
        w[k] -= step / scale_;
      }
      slots[row] = -1;
    }
    touched.clear();
    grads.clear();
  }

  const SgnsConfig& cfg_;
  std::size_t n_;
  std::size_t d_;
  std::vector<double> in_, out_, acc_in_, acc_out_;
  std::vector<std::int64_t> slot_in_, slot_out_;
  std::vector<std::uint32_t> touched_in_, touched_out_;
  std::vector<double> grads_in_, grads_out_;
  std::size_t terms_ = 0;
  double scale_ = 1.0;
};

struct EpochStats {
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::size_t terms = 0;
};

bool should_stop(const TrainLog& log, const SgnsConfig& cfg, double& best,
                 unsigned& stall) {
  const double acc = log.epoch_accuracy.back();
  if (acc - best > cfg.early_stop_delta) {
    best = acc;
    stall = 0;
  } else {
    ++stall;
  }
  return stall >= cfg.early_stop_patience;
}

} // namespace

EmbeddingTable train(const InteractionDataset& data, const SgnsConfig& config,
                     TrainLog* log) {
  config.validate();
  if (data.num_items() < 2)
    throw DomainError("sgns: untrainable, fewer than 2 distinct items");

  // All (center, context) pairs within `window` inside train sequences.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::size_t u = 0; u < data.num_users(); ++u) {
    const auto seq = data.train_items(u);
    const std::int64_t len = static_cast<std::int64_t>(seq.size());
    for (std::int64_t t = 0; t < len; ++t) {
      const std::int64_t lo = std::max<std::int64_t>(0, t - config.window);
      const std::int64_t hi =
          std::min<std::int64_t>(len - 1, t + config.window);
      for (std::int64_t c = lo; c <= hi; ++c)
        if (c != t) pairs.emplace_back(seq[t], seq[c]);
    }
  }
  if (pairs.empty())
    throw DomainError("sgns: untrainable, no co-occurrence pairs");

  // Unigram^0.75 negative distribution over train counts.
  std::vector<double> neg_weights(data.num_items());
  for (std::size_t i = 0; i < data.num_items(); ++i)
    neg_weights[i] =
        std::pow(static_cast<double>(data.item_train_counts[i]), 0.75);
  const AliasTable negatives(neg_weights);

  Rng rng(derive_seed(config.seed, "sgns-train"));
  Trainer trainer(data.num_items(), config, rng);

  TrainLog local_log;
  TrainLog& tl = log ? *log : local_log;
  double best_accuracy = -1.0;
  unsigned stall = 0;

  for (unsigned epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(pairs);
    EpochStats stats;
    std::size_t in_batch = 0;
    for (const auto& [center, context] : pairs) {
      for (unsigned k = 0; k < config.negatives; ++k) {
        std::uint32_t neg =
            static_cast<std::uint32_t>(negatives.sample(rng));
        while (neg == context)
          neg = static_cast<std::uint32_t>(negatives.sample(rng));
        const auto [loss, correct] = trainer.accumulate(center, context, neg);
        stats.loss_sum += loss;
        stats.correct += correct ? 1 : 0;
        ++stats.terms;
      }
      if (++in_batch == config.batch_size) {
        trainer.apply_batch();
        in_batch = 0;
      }
    }
    if (in_batch > 0) trainer.apply_batch();

    tl.epoch_loss.push_back(stats.loss_sum / static_cast<double>(stats.terms));
    tl.epoch_accuracy.push_back(static_cast<double>(stats.correct) /
                                static_cast<double>(stats.terms));
    if (should_stop(tl, config, best_accuracy, stall)) {
      tl.early_stopped = true;
      break;
    }
  }
  return trainer.export_table(&data.item_ids);
}

std::vector<Triplet> controlled_cl_sample(std::span<const std::uint32_t> labels,
                                          std::size_t n, std::uint64_t seed) {
  if (labels.empty()) throw SamplingError("controlled sample: no items");
  const std::uint32_t num_classes =
      *std::max_element(labels.begin(), labels.end()) + 1;
  if (num_classes < 2)
    throw SamplingError("controlled sample: need at least two classes");

  std::vector<std::vector<std::uint32_t>> members(num_classes);
  for (std::uint32_t i = 0; i < labels.size(); ++i)
    members[labels[i]].push_back(i);
  for (std::uint32_t c = 0; c < num_classes; ++c)
    if (members[c].size() < 2)
      throw SamplingError("controlled sample: class " + std::to_string(c) +
                          " has fewer than two members");

  Rng rng(derive_seed(seed, "controlled-cl"));
  std::vector<Triplet> triplets;
  triplets.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Triplet t;
    t.anchor = static_cast<std::uint32_t>(rng.next_index(labels.size()));
    const auto& same = members[labels[t.anchor]];
    do {
      t.positive = same[rng.next_index(same.size())];
    } while (t.positive == t.anchor);
    do {
      t.negative = static_cast<std::uint32_t>(rng.next_index(labels.size()));
    } while (labels[t.negative] == labels[t.anchor]);
    triplets.push_back(t);
  }
  return triplets;
}

EmbeddingTable train_triplets(std::span<const Triplet> triplets,
                              std::size_t num_items, const SgnsConfig& config,
                              const std::vector<std::string>* ids,
                              TrainLog* log) {
  config.validate();
  if (triplets.empty()) throw DomainError("train_triplets: empty triplet list");
  if (num_items < 2)
    throw DomainError("train_triplets: fewer than 2 distinct items");
  for (const Triplet& t : triplets)
    if (t.anchor >= num_items || t.positive >= num_items ||
        t.negative >= num_items)
      throw LookupError("train_triplets: triplet index out of range");
  if (ids && ids->size() != num_items)
    throw ValidationError("train_triplets: id count mismatch");

  Rng rng(derive_seed(config.seed, "sgns-train"));
  Trainer trainer(num_items, config, rng);

  std::vector<std::uint32_t> order(triplets.size());
  std::iota(order.begin(), order.end(), 0);

  TrainLog local_log;
  TrainLog& tl = log ? *log : local_log;
  double best_accuracy = -1.0;
  unsigned stall = 0;

  for (unsigned epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(order);
    EpochStats stats;
    std::size_t in_batch = 0;
    for (std::uint32_t idx : order) {
      const Triplet& t = triplets[idx];
      const auto [loss, correct] =
          trainer.accumulate(t.anchor, t.positive, t.negative);
      stats.loss_sum += loss;
      stats.correct += correct ? 1 : 0;
      ++stats.terms;
      if (++in_batch == config.batch_size) {
        trainer.apply_batch();
        in_batch = 0;
      }
    }
    if (in_batch > 0) trainer.apply_batch();

    tl.epoch_loss.push_back(stats.loss_sum / static_cast<double>(stats.terms));
    tl.epoch_accuracy.push_back(static_cast<double>(stats.correct) /
                                static_cast<double>(stats.terms));
    if (should_stop(tl, config, best_accuracy, stall)) {
      tl.early_stopped = true;
      break;
    }
  }
  return trainer.export_table(ids);
}

StabilityReport stability_study(const InteractionDataset& data,
                                const SgnsConfig& config, unsigned runs,
                                std::size_t kernel_pair_sample) {
  if (runs < 2) throw DomainError("stability_study: runs must be >= 2");

  std::vector<EmbeddingTable> tables(runs);

  // Independent repetitions: disjoint tables, per-run streams.
  parallel_for(0, runs, 1, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      SgnsConfig run_config = config;
      run_config.seed = config.seed + r;
      tables[r] = train(data, run_config);
    }
  });

  return stability_from_tables(tables,
                               derive_seed(config.seed, "stability-pairs"),
                               kernel_pair_sample);
}

StabilityReport stability_from_tables(const std::vector<EmbeddingTable>& tables,
                                      std::uint64_t pair_seed,
                                      std::size_t kernel_pair_sample) {
  if (tables.size() < 2)
    throw DomainError("stability: need at least two runs");
  const std::size_t n = tables[0].size();
  const std::size_t d = tables[0].dim();
  for (const auto& t : tables)
    if (t.size() != n || t.dim() != d)
      throw ValidationError("stability: table shapes differ across runs");

  const unsigned runs = static_cast<unsigned>(tables.size());
  StabilityReport report;
  report.run_count = runs;

  // Entrywise sample SD across runs.
  report.per_entry_sd = Matrix(n, d);
  double sd_sum = 0.0;
  double abs_sum = 0.0;
  std::vector<double> values(runs);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      for (unsigned r = 0; r < runs; ++r) {
        values[r] = tables[r].row(i)[k];
        abs_sum += std::fabs(values[r]);
      }
      const double sd = sample_sd(values);
      report.per_entry_sd.at(i, k) = sd;
      sd_sum += sd;
    }
  }
  const double entries = static_cast<double>(n * d);
  report.mean_coordinate_sd = sd_sum / entries;
  report.mean_abs_coordinate = abs_sum / (entries * runs);

  // Kernel SD over a fixed random pair sample.
  Rng rng(pair_seed);
  report.sampled_pairs.reserve(kernel_pair_sample);
  for (std::size_t s = 0; s < kernel_pair_sample; ++s) {
    const std::uint32_t i = static_cast<std::uint32_t>(rng.next_index(n));
    std::uint32_t j = static_cast<std::uint32_t>(rng.next_index(n));
    while (n > 1 && j == i)
      j = static_cast<std::uint32_t>(rng.next_index(n));
    report.sampled_pairs.emplace_back(i, j);
  }
  Matrix pair_kernels(runs, kernel_pair_sample);
  for (unsigned r = 0; r < runs; ++r)
    for (std::size_t s = 0; s < kernel_pair_sample; ++s)
      pair_kernels.at(r, s) =
          kernel(tables[r], report.sampled_pairs[s].first,
                 report.sampled_pairs[s].second);

  report.per_pair_kernel_sd.resize(kernel_pair_sample);
  for (std::size_t s = 0; s < kernel_pair_sample; ++s) {
    for (unsigned r = 0; r < runs; ++r) values[r] = pair_kernels.at(r, s);
    report.per_pair_kernel_sd[s] = sample_sd(values);
  }

  // Rank correlations between run pairs: kernels persist, coordinates drift.
  std::vector<double> coord_corrs, kernel_corrs;
  for (unsigned r = 0; r < runs; ++r) {
    for (unsigned q = r + 1; q < runs; ++q) {
      std::span<const double> kr(&pair_kernels.at(r, 0), kernel_pair_sample);
      std::span<const double> kq(&pair_kernels.at(q, 0), kernel_pair_sample);
      kernel_corrs.push_back(spearman(kr, kq));
      coord_corrs.push_back(
          spearman(tables[r].values(), tables[q].values()));
    }
  }
  report.kernel_rank_corr = mean(kernel_corrs);
  report.coordinate_rank_corr = mean(coord_corrs);

  // Residual coordinate SD after Procrustes alignment to run 0.
  std::vector<Matrix> aligned;
  aligned.reserve(runs);
  Matrix reference(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) reference.at(i, k) = tables[0].row(i)[k];
  aligned.push_back(reference);
  for (unsigned r = 1; r < runs; ++r) {
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) m.at(i, k) = tables[r].row(i)[k];
    const Matrix rotation = procrustes_rotation(m, reference);
    aligned.push_back(matmul(m, rotation));
  }
  double aligned_sd_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      for (unsigned r = 0; r < runs; ++r) values[r] = aligned[r].at(i, k);
      aligned_sd_sum += sample_sd(values);
    }
  }
  report.aligned_mean_coordinate_sd = aligned_sd_sum / entries;
  return report;
}

} // namespace embkit
