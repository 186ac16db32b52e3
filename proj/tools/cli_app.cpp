#include "cli_app.hpp"

#include "embkit/clf_metrics.hpp"
#include "embkit/dataset.hpp"
#include "embkit/embedding_table.hpp"
#include "embkit/errors.hpp"
#include "embkit/harness.hpp"
#include "embkit/kernels.hpp"
#include "embkit/parallel.hpp"
#include "embkit/report.hpp"
#include "embkit/rng.hpp"
#include "embkit/seq_metrics.hpp"
#include "embkit/sgns.hpp"
#include "embkit/simulator.hpp"
#include "embkit/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace embkit::cli {

namespace {

using nlohmann::json;

struct SgnsFlags {
  SgnsConfig config;
  void attach(CLI::App* cmd) {
    cmd->add_option("--dim", config.dim, "Embedding dimension")
        ->capture_default_str();
    cmd->add_option("--window", config.window, "Co-occurrence window size")
        ->capture_default_str();
    cmd->add_option("--negatives", config.negatives,
                    "Negative samples per positive pair")
        ->capture_default_str();
    cmd->add_option("--lr", config.learning_rate, "Initial learning rate")
        ->capture_default_str();
    cmd->add_option("--batch-size", config.batch_size, "Pairs per batch")
        ->capture_default_str();
    cmd->add_option("--l2", config.l2, "L2 regularization strength")
        ->capture_default_str();
    cmd->add_option("--max-epochs", config.max_epochs, "Epoch cap")
        ->capture_default_str();
    cmd->add_option("--early-stop-delta", config.early_stop_delta,
                    "Minimum accuracy improvement")
        ->capture_default_str();
    cmd->add_option("--patience", config.early_stop_patience,
                    "Consecutive stalled epochs before stopping")
        ->capture_default_str();
    cmd->add_flag("--sgd", [this](std::int64_t) { config.use_rmsprop = false; },
                  "Plain SGD instead of RMSprop");
  }
};

json training_summary(const TrainLog& log) {
  return json{{"epochs", log.epoch_loss.size()},
              {"early_stopped", log.early_stopped},
              {"final_loss", log.epoch_loss.empty() ? 0.0 : log.epoch_loss.back()},
              {"final_accuracy",
               log.epoch_accuracy.empty() ? 0.0 : log.epoch_accuracy.back()}};
}

json summary_of(const SeqEvalSummary& s) {
  json hit = json::object();
  for (const auto& [k, v] : s.hit_at) hit["hit_at_" + std::to_string(k)] = v;
  json out{{"mrr", s.mrr}, {"ndcg", s.ndcg}, {"users", s.users}};
  out.update(hit);
  return out;
}

json alignment_to_json(const AlignmentScore& a) {
  return json{{"value", a.value},
              {"numerator", a.numerator},
              {"denominator", a.denominator},
              {"pair_count", a.pair_count},
              {"degenerate_labels", a.degenerate_labels},
              {"sampled", a.sampled}};
}

void print_flat(const json& node, const std::string& prefix) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it)
      print_flat(it.value(),
                 prefix.empty() ? it.key() : prefix + "." + it.key());
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i)
      print_flat(node[i], prefix + "[" + std::to_string(i) + "]");
  } else {
    std::cout << prefix << ": " << node.dump() << "\n";
  }
}

// ---------------------------------------------------------------------------
// Subcommand payloads
// ---------------------------------------------------------------------------

struct PretrainArgs {
  std::string data_path, out_path, text_out, report_path;
  bool no_five_core = false;
  SgnsFlags sgns;
};

int run_pretrain(const PretrainArgs& args) {
  LoadOptions load;
  load.five_core = !args.no_five_core;
  const InteractionDataset data = load_interactions_csv(args.data_path, load);

  TrainLog log;
  const EmbeddingTable table = train(data, args.sgns.config, &log);
  save_embeddings_binary(table, args.out_path);
  if (!args.text_out.empty()) save_embeddings_text(table, args.text_out);

  if (!args.report_path.empty()) {
    MetricReport report;
    report.set("pretrain", training_summary(log));
    report.set("pretrain.items", table.size());
    report.set("pretrain.users", data.num_users());
    write_report(report, args.report_path);
  }
  return 0;
}

struct StabilityArgs {
  std::string data_path, report_path;
  unsigned runs = 10;
  bool no_five_core = false;
  SgnsFlags sgns;
};

int run_stability(const StabilityArgs& args) {
  LoadOptions load;
  load.five_core = !args.no_five_core;
  const InteractionDataset data = load_interactions_csv(args.data_path, load);
  const StabilityReport stability = stability_study(data, args.sgns.config, args.runs);

  MetricReport report;
  report.set("stability",
             json{{"runs", stability.run_count},
                  {"mean_coordinate_sd", stability.mean_coordinate_sd},
                  {"mean_abs_coordinate", stability.mean_abs_coordinate},
                  {"mean_pair_kernel_sd",
                   mean(stability.per_pair_kernel_sd)},
                  {"coordinate_rank_corr", stability.coordinate_rank_corr},
                  {"kernel_rank_corr", stability.kernel_rank_corr},
                  {"aligned_mean_coordinate_sd",
                   stability.aligned_mean_coordinate_sd}});
  write_report(report, args.report_path);
  return 0;
}

struct EvalClfArgs {
  std::string emb_path, labels_path, report_path;
  double delta = 0.0; // 0 = skip bound check
  unsigned resamples = 200;
  std::string positive_class;
  std::uint64_t seed = 42;
};

int run_eval_clf(const EvalClfArgs& args) {
  const EmbeddingTable table = load_embeddings(args.emb_path);
  const LabelCatalog catalog =
      restrict_to_table(load_labels_csv(args.labels_path), table);
  const auto bound = bind_labels(catalog, table);

  std::vector<std::size_t> items;
  std::vector<std::uint32_t> labels;
  items.reserve(bound.size());
  for (const auto& [row, cls] : bound) {
    items.push_back(row);
    labels.push_back(cls);
  }

  AlignmentOptions options;
  options.seed = args.seed;
  const AlignmentScore score = alignment(table, labels, items, options);

  // Kernel-classifier downstream check on a seeded 80/10/10 item split.
  const SplitIndices split = split_80_10_10(items.size(), args.seed);
  std::vector<std::size_t> train_items, test_items;
  std::vector<std::uint32_t> train_labels, test_labels;
  for (std::size_t i : split.train) {
    train_items.push_back(items[i]);
    train_labels.push_back(labels[i]);
  }
  for (std::size_t i : split.test) {
    test_items.push_back(items[i]);
    test_labels.push_back(labels[i]);
  }
  const std::vector<std::uint32_t> predictions = kernel_classifier_predict_batch(
      table, train_items, train_labels, catalog.num_classes(), test_items);
  const F1Scores f1 = f1_scores(predictions, test_labels);

  MetricReport report;
  report.set("alignment", alignment_to_json(score));
  report.set("kernel_classifier",
             json{{"micro_f1", f1.micro},
                  {"macro_f1", f1.macro},
                  {"train_items", train_items.size()},
                  {"test_items", test_items.size()}});

  if (args.delta > 0.0) {
    std::optional<std::uint32_t> positive;
    if (!args.positive_class.empty()) {
      for (std::uint32_t c = 0; c < catalog.class_names.size(); ++c)
        if (catalog.class_names[c] == args.positive_class) positive = c;
      if (!positive)
        throw LookupError("unknown positive class '" + args.positive_class +
                          "'");
    }
    const BoundCheckResult check =
        bound_check(table, labels, items, args.delta, args.resamples,
                    args.seed, positive);
    report.set("bound_check", json{{"pass_fraction", check.pass_fraction},
                                   {"mean_risk", check.mean_risk},
                                   {"mean_bound", check.mean_bound},
                                   {"resamples", check.resamples},
                                   {"delta", check.delta}});
  }
  write_report(report, args.report_path);
  return 0;
}

struct EvalSeqArgs {
  std::string emb_path, data_path, report_path;
  double alpha = 0.0; // 0 = average exposure probability
  std::vector<int> ks{10};
  std::string split = "test";
  std::string scorer = "seq";
  bool no_five_core = false;
};

int run_eval_seq(const EvalSeqArgs& args) {
  LoadOptions load;
  load.five_core = !args.no_five_core;
  const InteractionDataset data = load_interactions_csv(args.data_path, load);
  const EmbeddingTable full = load_embeddings(args.emb_path);
  const EmbeddingTable table = subset_by_ids(full, data.item_ids);

  const std::optional<double> alpha_override =
      args.alpha > 0.0 ? std::optional<double>(args.alpha) : std::nullopt;
  const ExposureModel exposure =
      build_exposure(std::span<const std::int64_t>(data.item_train_counts),
                     alpha_override);

  SeqScorer scorer = SeqScorer::kExposureWeighted;
  if (args.scorer == "last") scorer = SeqScorer::kLastItem;
  else if (args.scorer == "mean") scorer = SeqScorer::kUnweightedMean;
  else if (args.scorer != "seq")
    throw ValidationError("unknown scorer '" + args.scorer + "'");

  const SeqEvalSummary summary =
      evaluate_sequences(table, data, exposure, args.ks, scorer,
                         args.split == "test");

  MetricReport report;
  report.set("ranking", summary_of(summary));
  report.set("ranking.split", args.split);
  report.set("ranking.scorer", args.scorer);
  report.set("ranking.alpha", exposure.alpha);
  write_report(report, args.report_path);
  return 0;
}

struct SimulateArgs {
  std::string out_dir;
  SimConfig config;
};

int run_simulate(const SimulateArgs& args) {
  const SimOutput sim = simulate(args.config);
  std::filesystem::create_directories(args.out_dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };

  save_interactions_csv(sim.to_dataset(), path("interactions.csv"));
  save_embeddings_binary(sim.items, path("items.embk"));

  std::vector<std::string> user_ids;
  std::vector<double> intent_data = sim.intents.data;
  for (std::size_t u = 0; u < sim.config.num_users; ++u)
    user_ids.push_back("user_" + std::to_string(u));
  save_embeddings_binary(
      EmbeddingTable(std::move(user_ids), std::move(intent_data),
                     sim.config.dim),
      path("intents.embk"));

  json exposure{{"p0", sim.exposure.p0}, {"alpha", sim.exposure.alpha}};
  json config{{"lambda", sim.config.lambda},
              {"catalog_size", sim.config.catalog_size},
              {"dim", sim.config.dim},
              {"num_users", sim.config.num_users},
              {"history_len", sim.config.history_len},
              {"exposure_skew", sim.config.exposure_skew},
              {"intent_strength", sim.config.intent_strength},
              {"seed", sim.config.seed}};
  std::ofstream meta(path("sim_meta.json"));
  if (!meta) throw IoError("cannot write sim_meta.json");
  meta << json{{"exposure", exposure}, {"config", config}}.dump(2) << '\n';
  return 0;
}

struct RecoverArgs {
  std::string sim_dir, report_path;
  std::vector<double> alpha_grid;
};

SimOutput load_sim_dir(const std::string& dir) {
  const auto path = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  std::ifstream meta_in(path("sim_meta.json"));
  if (!meta_in) throw IoError("cannot open sim_meta.json in " + dir);
  json meta;
  meta_in >> meta;

  SimConfig config;
  config.lambda = meta["config"]["lambda"].get<double>();
  config.catalog_size = meta["config"]["catalog_size"].get<std::size_t>();
  config.dim = meta["config"]["dim"].get<std::size_t>();
  config.num_users = meta["config"]["num_users"].get<std::size_t>();
  config.history_len = meta["config"]["history_len"].get<std::size_t>();
  config.exposure_skew = meta["config"]["exposure_skew"].get<double>();
  config.intent_strength = meta["config"]["intent_strength"].get<double>();
  config.seed = meta["config"]["seed"].get<std::uint64_t>();

  SimOutput sim{config, load_embeddings_binary(path("items.embk")),
                ExposureModel{}, {}, {},
                Matrix(config.num_users, config.dim)};
  sim.exposure.p0 = meta["exposure"]["p0"].get<std::vector<double>>();
  sim.exposure.alpha = meta["exposure"]["alpha"].get<double>();
  sim.exposure.validate();

  const EmbeddingTable intents = load_embeddings_binary(path("intents.embk"));
  if (intents.size() != config.num_users || intents.dim() != config.dim)
    throw ValidationError("sim dir: intents shape mismatch");

  const RawInteractions raw = load_raw_interactions_csv(path("interactions.csv"));
  if (raw.user_ids.size() != config.num_users)
    throw ValidationError("sim dir: user count mismatch");

  sim.histories.resize(config.num_users);
  sim.truths.resize(config.num_users);
  for (std::size_t u = 0; u < config.num_users; ++u) {
    const std::size_t row = intents.index_of(raw.user_ids[u]);
    const auto& events = raw.rows[u];
    if (events.size() < 2)
      throw ValidationError("sim dir: user sequence too short");
    auto& history = sim.histories[row];
    for (std::size_t t = 0; t + 1 < events.size(); ++t)
      history.push_back(
          static_cast<std::uint32_t>(sim.items.index_of(events[t].first)));
    sim.truths[row] = static_cast<std::uint32_t>(
        sim.items.index_of(events.back().first));
    const auto intent_row = intents.row(row);
    for (std::size_t k = 0; k < config.dim; ++k)
      sim.intents.at(row, k) = intent_row[k];
  }
  return sim;
}

int run_recover(const RecoverArgs& args) {
  const SimOutput sim = load_sim_dir(args.sim_dir);
  const RecoveryReport recovery = recovery_experiment(sim, args.alpha_grid);

  json weighted = json::array();
  for (const RecoveryEntry& e : recovery.weighted)
    weighted.push_back(json{{"alpha", e.alpha},
                            {"mean_cosine", e.mean_cosine},
                            {"mean_mrr", e.mean_mrr},
                            {"cosine_diff_mean", e.cosine_diff_mean},
                            {"cosine_diff_se", e.cosine_diff_se},
                            {"mrr_diff_mean", e.mrr_diff_mean},
                            {"mrr_diff_se", e.mrr_diff_se}});

  const RecoveryEntry& best = recovery.weighted[recovery.best_by_mrr];
  MetricReport report;
  report.set("recovery",
             json{{"weighted", weighted},
                  {"unweighted",
                   json{{"mean_cosine", recovery.unweighted.mean_cosine},
                        {"mean_mrr", recovery.unweighted.mean_mrr}}},
                  {"best_alpha", best.alpha},
                  {"best_mean_mrr", best.mean_mrr},
                  {"best_mean_cosine", best.mean_cosine},
                  {"ranked_users", recovery.ranked_users},
                  {"total_users", recovery.total_users}});
  write_report(report, args.report_path);
  return 0;
}

struct StructureArgs {
  std::string labels_path, report_path;
  unsigned runs = 10;
  std::size_t triplets = 0;
  SgnsFlags sgns;
};

int run_structure(const StructureArgs& args) {
  const LabelCatalog catalog = load_labels_csv(args.labels_path);
  std::vector<std::uint32_t> labels;
  labels.reserve(catalog.items.size());
  for (const auto& [item, cls] : catalog.items) labels.push_back(cls);

  const StructureReport result =
      structure_experiment(labels, args.sgns.config, args.runs, args.triplets);

  MetricReport report;
  report.set("structure", json{{"runs", result.runs},
                               {"lr_macro_mean", result.lr_macro_mean},
                               {"lr_macro_sd", result.lr_macro_sd},
                               {"ip_macro_mean", result.ip_macro_mean},
                               {"ip_macro_sd", result.ip_macro_sd},
                               {"lr_micro_mean", result.lr_micro_mean},
                               {"ip_micro_mean", result.ip_micro_mean},
                               {"per_run_lr_macro", result.per_run_lr_macro},
                               {"per_run_ip_macro", result.per_run_ip_macro}});
  write_report(report, args.report_path);
  return 0;
}

struct CorrelateArgs {
  std::string data_path, labels_path, report_path, plot_data_path;
  std::vector<unsigned> windows{2, 3};
  std::vector<unsigned> negatives{2, 3, 4};
  bool no_five_core = false;
  SgnsFlags sgns;
};

int run_correlate(const CorrelateArgs& args) {
  LoadOptions load;
  load.five_core = !args.no_five_core;
  const InteractionDataset data = load_interactions_csv(args.data_path, load);
  const LabelCatalog catalog = load_labels_csv(args.labels_path);

  const ExposureModel exposure =
      build_exposure(std::span<const std::int64_t>(data.item_train_counts));
  const std::uint64_t seed = args.sgns.config.seed;
  const int ks[] = {10};

  std::vector<EmbeddingVariant> variants;
  for (unsigned w : args.windows) {
    for (unsigned k : args.negatives) {
      SgnsConfig config = args.sgns.config;
      config.window = w;
      config.negatives = k;
      EmbeddingVariant variant;
      variant.name = "w" + std::to_string(w) + "n" + std::to_string(k);
      variant.config = config;
      variant.table = train(data, config);

      // Alignment + classification on the labeled subset.
      const LabelCatalog usable = restrict_to_table(catalog, variant.table);
      const auto bound = bind_labels(usable, variant.table);
      std::vector<std::size_t> items;
      std::vector<std::uint32_t> labels;
      for (const auto& [row, cls] : bound) {
        items.push_back(row);
        labels.push_back(cls);
      }
      AlignmentOptions alignment_options;
      alignment_options.seed = seed;
      variant.kernel_metric =
          alignment(variant.table, labels, items, alignment_options).value;

      const SplitIndices split = split_80_10_10(items.size(), seed);
      std::vector<std::size_t> train_items, test_items;
      std::vector<std::uint32_t> train_labels, test_labels;
      for (std::size_t i : split.train) {
        train_items.push_back(items[i]);
        train_labels.push_back(labels[i]);
      }
      for (std::size_t i : split.test) {
        test_items.push_back(items[i]);
        test_labels.push_back(labels[i]);
      }
      const auto predictions = kernel_classifier_predict_batch(
          variant.table, train_items, train_labels, usable.num_classes(),
          test_items);
      const F1Scores f1 = f1_scores(predictions, test_labels);
      variant.downstream_metrics["clf_macro_f1"] = f1.macro;
      variant.downstream_metrics["clf_micro_f1"] = f1.micro;

      // Sequential metrics over the test split.
      variant.downstream_metrics["seq_mrr"] =
          evaluate_sequences(variant.table, data, exposure, ks,
                             SeqScorer::kExposureWeighted)
              .mrr;
      variant.downstream_metrics["last_item_mrr"] =
          evaluate_sequences(variant.table, data, exposure, ks,
                             SeqScorer::kLastItem)
              .mrr;
      variant.downstream_metrics["mean_history_mrr"] =
          evaluate_sequences(variant.table, data, exposure, ks,
                             SeqScorer::kUnweightedMean)
              .mrr;
      variants.push_back(std::move(variant));
    }
  }

  const CorrelationReport clf = correlate(variants, "kernel", "clf_macro_f1");
  const CorrelationReport seq =
      correlate(variants, "seq_mrr", "last_item_mrr");

  MetricReport report;
  json variant_list = json::array();
  for (const EmbeddingVariant& v : variants) {
    json entry{{"name", v.name}, {"alignment", v.kernel_metric}};
    for (const auto& [key, value] : v.downstream_metrics) entry[key] = value;
    variant_list.push_back(entry);
  }
  report.set("correlation",
             json{{"variants", variant_list},
                  {"alignment_vs_clf_macro_f1",
                   json{{"pearson", clf.pearson},
                        {"spearman", clf.spearman},
                        {"n_variants", clf.n_variants}}},
                  {"seq_mrr_vs_last_item_mrr",
                   json{{"pearson", seq.pearson},
                        {"spearman", seq.spearman},
                        {"n_variants", seq.n_variants}}}});
  write_report(report, args.report_path);

  if (!args.plot_data_path.empty()) {
    std::ofstream plot(args.plot_data_path);
    if (!plot) throw IoError("cannot write " + args.plot_data_path);
    plot << "variant,kernel_metric,clf_macro_f1,seq_mrr,last_item_mrr\n";
    for (const EmbeddingVariant& v : variants)
      plot << v.name << ',' << v.kernel_metric << ','
           << v.downstream_metrics.at("clf_macro_f1") << ','
           << v.downstream_metrics.at("seq_mrr") << ','
           << v.downstream_metrics.at("last_item_mrr") << '\n';
  }
  return 0;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out_path;
  bool print = false;
};

int run_report(const ReportArgs& args) {
  MetricReport merged;
  for (const std::string& path : args.inputs)
    merge_report(merged, read_report(path));
  if (!args.out_path.empty()) write_report(merged, args.out_path);
  if (args.print || args.out_path.empty()) print_flat(merged.root(), "");
  return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Kernel-based evaluation toolkit for pretrained embeddings"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file (flags override)");
  app.allow_config_extras(CLI::config_extras_mode::error); // unknown keys

  unsigned threads = 0;
  app.add_option("--threads", threads,
                 "Worker thread cap (0 = available cores)");

  std::uint64_t seed = 42;
  app.add_option("--seed", seed, "Root seed; per-stage streams derive from it")
      ->capture_default_str();

  // pretrain
  PretrainArgs pretrain_args;
  CLI::App* pretrain = app.add_subcommand(
      "pretrain", "Train item embeddings on an interaction log");
  pretrain->add_option("--data", pretrain_args.data_path, "Interaction CSV")
      ->required();
  pretrain->add_option("--out", pretrain_args.out_path, "Binary output table")
      ->required();
  pretrain->add_option("--text-out", pretrain_args.text_out,
                       "Also write the text container");
  pretrain->add_option("--report", pretrain_args.report_path,
                       "Training summary JSON");
  pretrain->add_flag("--no-five-core", pretrain_args.no_five_core,
                     "Skip 5-core filtering");
  pretrain_args.sgns.attach(pretrain);

  // stability
  StabilityArgs stability_args;
  CLI::App* stability = app.add_subcommand(
      "stability", "Coordinate vs kernel variability across repetitions");
  stability->add_option("--data", stability_args.data_path, "Interaction CSV")
      ->required();
  stability->add_option("--out", stability_args.report_path, "Report JSON")
      ->required();
  stability->add_option("--runs", stability_args.runs, "Independent runs")
      ->capture_default_str();
  stability->add_flag("--no-five-core", stability_args.no_five_core,
                      "Skip 5-core filtering");
  stability_args.sgns.attach(stability);

  // eval-clf
  EvalClfArgs eval_clf_args;
  CLI::App* eval_clf = app.add_subcommand(
      "eval-clf", "Alignment metric and kernel-classifier F1");
  eval_clf->add_option("--emb", eval_clf_args.emb_path, "Embedding table")
      ->required();
  eval_clf->add_option("--labels", eval_clf_args.labels_path, "Label CSV")
      ->required();
  eval_clf->add_option("--out", eval_clf_args.report_path, "Report JSON")
      ->required();
  eval_clf->add_option("--delta", eval_clf_args.delta,
                       "Risk bound confidence (enables the bound check)");
  eval_clf->add_option("--resamples", eval_clf_args.resamples,
                       "Bound check resamples")
      ->capture_default_str();
  eval_clf->add_option("--positive-class", eval_clf_args.positive_class,
                       "Positive class for multi-class bound checks");

  // eval-seq
  EvalSeqArgs eval_seq_args;
  CLI::App* eval_seq = app.add_subcommand(
      "eval-seq", "Full-catalog sequential ranking metrics");
  eval_seq->add_option("--emb", eval_seq_args.emb_path, "Embedding table")
      ->required();
  eval_seq->add_option("--data", eval_seq_args.data_path, "Interaction CSV")
      ->required();
  eval_seq->add_option("--out", eval_seq_args.report_path, "Report JSON")
      ->required();
  eval_seq->add_option("--alpha", eval_seq_args.alpha,
                       "Exposure mixing constant (default: mean exposure)");
  eval_seq->add_option("--ks", eval_seq_args.ks, "Hit@k cutoffs")
      ->capture_default_str();
  eval_seq
      ->add_option("--split", eval_seq_args.split, "test or valid")
      ->check(CLI::IsMember({"test", "valid"}))
      ->capture_default_str();
  eval_seq->add_option("--scorer", eval_seq_args.scorer,
                       "seq (exposure-weighted), last, or mean")
      ->check(CLI::IsMember({"seq", "last", "mean"}))
      ->capture_default_str();
  eval_seq->add_flag("--no-five-core", eval_seq_args.no_five_core,
                     "Skip 5-core filtering");

  // simulate
  SimulateArgs simulate_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Generate exposure-biased interaction data");
  sim->add_option("--out-dir", simulate_args.out_dir, "Output directory")
      ->required();
  sim->add_option("--lambda", simulate_args.config.lambda,
                  "Exposure mixing weight in (0,1)")
      ->capture_default_str();
  sim->add_option("--skew", simulate_args.config.exposure_skew,
                  "Zipf exponent of the exposure distribution")
      ->capture_default_str();
  sim->add_option("--catalog", simulate_args.config.catalog_size,
                  "Catalog size")
      ->capture_default_str();
  sim->add_option("--dim", simulate_args.config.dim, "Embedding dimension")
      ->capture_default_str();
  sim->add_option("--users", simulate_args.config.num_users, "User count")
      ->capture_default_str();
  sim->add_option("--history", simulate_args.config.history_len,
                  "History length per user")
      ->capture_default_str();
  sim->add_option("--intent-strength", simulate_args.config.intent_strength,
                  "Norm of the hidden sequence representation")
      ->capture_default_str();

  // recover
  RecoverArgs recover_args;
  CLI::App* recover = app.add_subcommand(
      "recover", "Exposure-weighted vs unweighted aggregation on simulated data");
  recover->add_option("--sim-dir", recover_args.sim_dir,
                      "Directory written by simulate")
      ->required();
  recover->add_option("--out", recover_args.report_path, "Report JSON")
      ->required();
  recover
      ->add_option("--alpha-grid", recover_args.alpha_grid,
                   "Comma-separated alphas")
      ->required()
      ->delimiter(',');

  // structure
  StructureArgs structure_args;
  CLI::App* structure = app.add_subcommand(
      "structure", "Homogeneous vs heterogeneous head comparison");
  structure->add_option("--labels", structure_args.labels_path, "Label CSV")
      ->required();
  structure->add_option("--out", structure_args.report_path, "Report JSON")
      ->required();
  structure->add_option("--runs", structure_args.runs, "Repetitions")
      ->capture_default_str();
  structure->add_option("--triplets", structure_args.triplets,
                        "Triplets per run (0 = 100x items)");
  structure_args.sgns.attach(structure);

  // correlate
  CorrelateArgs correlate_args;
  CLI::App* correlate_cmd = app.add_subcommand(
      "correlate", "Variant grid: kernel metrics vs downstream performance");
  correlate_cmd->add_option("--data", correlate_args.data_path,
                            "Interaction CSV")
      ->required();
  correlate_cmd->add_option("--labels", correlate_args.labels_path,
                            "Label CSV")
      ->required();
  correlate_cmd->add_option("--out", correlate_args.report_path, "Report JSON")
      ->required();
  correlate_cmd
      ->add_option("--windows", correlate_args.windows, "Window grid")
      ->delimiter(',')
      ->capture_default_str();
  correlate_cmd
      ->add_option("--negatives-grid", correlate_args.negatives,
                   "Negative-sample grid")
      ->delimiter(',')
      ->capture_default_str();
  correlate_cmd->add_option("--emit-plot-data", correlate_args.plot_data_path,
                            "Scatter pair CSV for external plotting");
  correlate_cmd->add_flag("--no-five-core", correlate_args.no_five_core,
                          "Skip 5-core filtering");
  correlate_args.sgns.attach(correlate_cmd);

  // report
  ReportArgs report_args;
  CLI::App* report = app.add_subcommand(
      "report", "Merge and/or print metric reports");
  report->add_option("--in", report_args.inputs, "Input reports")->required();
  report->add_option("--out", report_args.out_path, "Merged output");
  report->add_flag("--print", report_args.print, "Print flattened metrics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  set_max_threads(threads);

  try {
    if (pretrain->parsed()) {
      pretrain_args.sgns.config.seed = seed;
      return run_pretrain(pretrain_args);
    }
    if (stability->parsed()) {
      stability_args.sgns.config.seed = seed;
      return run_stability(stability_args);
    }
    if (eval_clf->parsed()) {
      eval_clf_args.seed = seed;
      return run_eval_clf(eval_clf_args);
    }
    if (eval_seq->parsed()) return run_eval_seq(eval_seq_args);
    if (sim->parsed()) {
      simulate_args.config.seed = seed;
      return run_simulate(simulate_args);
    }
    if (recover->parsed()) return run_recover(recover_args);
    if (structure->parsed()) {
      structure_args.sgns.config.seed = seed;
      return run_structure(structure_args);
    }
    if (correlate_cmd->parsed()) {
      correlate_args.sgns.config.seed = seed;
      return run_correlate(correlate_args);
    }
    if (report->parsed()) return run_report(report_args);
  } catch (const Error& e) {
    std::cerr << "error [" << e.error_class() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace embkit::cli
