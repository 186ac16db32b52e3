#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "embkit/errors.hpp"
#include "embkit/harness.hpp"
#include "embkit/kernels.hpp"
#include "embkit/rng.hpp"
#include "embkit/stats.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace embkit;
using namespace testsupport;

TEST_CASE("80/10/10 split partitions the index range") {
  const SplitIndices split = split_80_10_10(100, 7);
  CHECK(split.train.size() == 80);
  CHECK(split.valid.size() == 10);
  CHECK(split.test.size() == 10);
  std::vector<bool> seen(100, false);
  for (auto part : {&split.train, &split.valid, &split.test})
    for (std::size_t i : *part) {
      CHECK(!seen[i]);
      seen[i] = true;
    }
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));

  const SplitIndices again = split_80_10_10(100, 7);
  CHECK(again.train == split.train); // seeded determinism
  CHECK_THROWS_AS(split_80_10_10(5, 7), DomainError);
}

TEST_CASE("softmax gradient matches central finite differences") {
  Rng rng(33);
  const std::size_t n = 12, dim = 5, classes = 3;
  std::vector<double> features(n * dim);
  std::vector<std::uint32_t> labels(n);
  for (double& f : features) f = rng.next_gaussian();
  for (auto& y : labels) y = static_cast<std::uint32_t>(rng.next_index(classes));

  const double l2 = 1e-3;
  const double h = 1e-6;
  for (int point = 0; point < 10; ++point) {
    std::vector<double> weights(classes * dim), bias(classes);
    for (double& w : weights) w = rng.next_gaussian();
    for (double& b : bias) b = rng.next_gaussian();

    std::vector<double> grad_w(classes * dim), grad_b(classes);
    softmax_objective_grad(features, dim, labels, classes, weights, bias, l2,
                           grad_w, grad_b);

    std::vector<double> scratch_w(classes * dim), scratch_b(classes);
    auto objective = [&](const std::vector<double>& w,
                         const std::vector<double>& b) {
      return softmax_objective_grad(features, dim, labels, classes, w, b, l2,
                                    scratch_w, scratch_b);
    };

    // A handful of coordinates per point keeps the test quick.
    for (std::size_t j = 0; j < weights.size(); j += 4) {
      std::vector<double> up = weights, down = weights;
      up[j] += h;
      down[j] -= h;
      const double fd = (objective(up, bias) - objective(down, bias)) / (2 * h);
      CHECK(std::fabs(grad_w[j] - fd) / std::max(1e-8, std::fabs(fd)) < 1e-4);
    }
    for (std::size_t c = 0; c < classes; ++c) {
      std::vector<double> up = bias, down = bias;
      up[c] += h;
      down[c] -= h;
      const double fd =
          (objective(weights, up) - objective(weights, down)) / (2 * h);
      CHECK(std::fabs(grad_b[c] - fd) / std::max(1e-8, std::fabs(fd)) < 1e-4);
    }
  }
}

TEST_CASE("linear head separates blobs and matches chance on noise") {
  const BlobData blobs = make_blobs(2, 60, 6, 4.0, 0.3, 5);
  const SplitIndices split = split_80_10_10(blobs.items.size(), 3);
  const HeadResult result = lr_head_fit(blobs.table, blobs.labels, split, 3);
  CHECK(result.f1.macro >= 0.99);

  // Loss is non-increasing under the fixed step size.
  for (std::size_t i = 1; i < result.loss_trace.size(); ++i)
    CHECK(result.loss_trace[i] <= result.loss_trace[i - 1] + 1e-12);

  // Shuffled labels drop macro F1 to chance.
  Rng rng(6);
  const std::size_t n = 1000;
  const auto noise_table = random_table(n, 6, 77);
  std::vector<std::uint32_t> random_labels(n);
  for (auto& y : random_labels)
    y = static_cast<std::uint32_t>(rng.next_index(4));
  const SplitIndices noise_split = split_80_10_10(n, 4);
  const F1Scores chance =
      lr_head_train_eval(noise_table, random_labels, noise_split, 4);
  CHECK(std::fabs(chance.macro - 0.25) < 0.1);

  // Single-class training set is rejected.
  const std::vector<std::uint32_t> constant(blobs.items.size(), 0);
  CHECK_THROWS_AS(lr_head_train_eval(blobs.table, constant, split, 3),
                  DomainError);
}

TEST_CASE("both heads reach Bayes-optimal blobs; ip is rotation invariant") {
  const BlobData blobs = make_blobs(3, 50, 8, 4.0, 0.35, 11);
  const SplitIndices split = split_80_10_10(blobs.items.size(), 9);

  const HeadResult lr = lr_head_fit(blobs.table, blobs.labels, split, 1);
  const HeadResult ip = ip_head_fit(blobs.table, blobs.labels, split, 1);
  CHECK(lr.f1.macro >= 0.95);
  CHECK(ip.f1.macro >= 0.95);

  for (std::size_t i = 1; i < ip.loss_trace.size(); ++i)
    CHECK(ip.loss_trace[i] <= ip.loss_trace[i - 1] + 1e-12);

  // Determinism under a fixed seed.
  const HeadResult ip2 = ip_head_fit(blobs.table, blobs.labels, split, 1);
  CHECK(ip.test_predictions == ip2.test_predictions);
  CHECK(ip.f1.macro == ip2.f1.macro);

  // The inner-product head decodes through kernels only, so rotating the
  // table leaves its predictions untouched.
  const auto rotated = random_rotation(blobs.table, 44);
  const HeadResult ip_rot = ip_head_fit(rotated, blobs.labels, split, 1);
  CHECK(ip_rot.test_predictions == ip.test_predictions);
}

TEST_CASE("identical embeddings push both heads to constant predictions") {
  const std::size_t n = 40;
  std::vector<std::string> ids;
  std::vector<double> data;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("same" + std::to_string(i));
    data.push_back(0.5);
    data.push_back(-0.25);
  }
  const EmbeddingTable table(std::move(ids), std::move(data), 2);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % 2;
  const SplitIndices split = split_80_10_10(n, 13);

  const HeadResult lr = lr_head_fit(table, labels, split, 13);
  const HeadResult ip = ip_head_fit(table, labels, split, 13);
  for (std::size_t i = 1; i < lr.test_predictions.size(); ++i)
    CHECK(lr.test_predictions[i] == lr.test_predictions[0]);
  for (std::size_t i = 1; i < ip.test_predictions.size(); ++i)
    CHECK(ip.test_predictions[i] == ip.test_predictions[0]);
}

TEST_CASE("structure experiment reports per-run spreads") {
  std::vector<std::uint32_t> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 30; ++i) labels.push_back(c);

  SgnsConfig config;
  config.dim = 8;
  config.max_epochs = 15;
  config.seed = 21;
  const StructureReport report =
      structure_experiment(labels, config, 5, 3000);
  CHECK(report.runs == 5);
  CHECK(report.per_run_ip_macro.size() == 5);
  CHECK(report.ip_macro_sd >= 0.0);
  CHECK(report.lr_macro_sd >= 0.0);
  CHECK(report.ip_macro_mean > 0.4); // class structure is learnable
  CHECK_THROWS_AS(structure_experiment(labels, config, 3), DomainError);
}

TEST_CASE("correlation report: worked three-point example") {
  std::vector<EmbeddingVariant> variants(3);
  const double xs[] = {1.0, 2.0, 3.0};
  const double ys[] = {1.0, 4.0, 9.0};
  for (int i = 0; i < 3; ++i) {
    variants[i].name = "v" + std::to_string(i);
    variants[i].kernel_metric = xs[i];
    variants[i].downstream_metrics["mrr"] = ys[i];
  }
  const CorrelationReport report = correlate(variants, "kernel", "mrr");
  CHECK(report.spearman == doctest::Approx(1.0));
  CHECK(report.pearson == doctest::Approx(0.98973).epsilon(1e-4));
  CHECK(report.n_variants == 3);

  // Anti-monotone pairs reverse the rank correlation.
  for (int i = 0; i < 3; ++i)
    variants[i].downstream_metrics["mrr"] = -ys[i];
  CHECK(correlate(variants, "kernel", "mrr").spearman ==
        doctest::Approx(-1.0));

  // Spearman is invariant under strictly increasing transforms.
  for (int i = 0; i < 3; ++i)
    variants[i].downstream_metrics["mrr"] = std::exp(ys[i] / 4.0);
  CHECK(correlate(variants, "kernel", "mrr").spearman ==
        doctest::Approx(1.0));

  // Zero variance has no defined correlation.
  for (int i = 0; i < 3; ++i) variants[i].downstream_metrics["mrr"] = 2.0;
  CHECK_THROWS_AS(correlate(variants, "kernel", "mrr"), DegenerateError);

  CHECK_THROWS_AS(
      correlate(std::span<const EmbeddingVariant>(variants.data(), 2),
                "kernel", "mrr"),
      DomainError);
  CHECK_THROWS_AS(correlate(variants, "kernel", "absent"), LookupError);
}

TEST_CASE("spearman handles ties by average ranks") {
  const std::vector<double> x{1.0, 2.0, 2.0, 3.0};
  const auto ranks = average_ranks(x);
  CHECK(ranks[0] == doctest::Approx(1.0));
  CHECK(ranks[1] == doctest::Approx(2.5));
  CHECK(ranks[2] == doctest::Approx(2.5));
  CHECK(ranks[3] == doctest::Approx(4.0));
}
