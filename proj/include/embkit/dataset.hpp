#pragma once

#include "embkit/embedding_table.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace embkit {

/**
 * Per-user chronological item sequences with leave-last-out splits.
 *
 * For every retained user the last item is the test target, the
 * second-to-last is the validation target, and the remainder is training
 * data; sequences therefore always have length >= 3. Item ids map to dense
 * indices. Immutable after construction and safe to share across threads.
 */
struct InteractionDataset {
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::vector<std::vector<std::uint32_t>> sequences;
  std::vector<std::int64_t> item_train_counts; // over train portions only

  std::size_t num_users() const { return user_ids.size(); }
  std::size_t num_items() const { return item_ids.size(); }

  std::span<const std::uint32_t> train_items(std::size_t user) const;
  std::uint32_t valid_item(std::size_t user) const;
  std::uint32_t test_item(std::size_t user) const;
};

struct LoadOptions {
  // Iterates user/item 5-core removal to a fixed point before splitting.
  bool five_core = true;
};

// Loads `user_id,item_id,timestamp` CSV rows (integer-second timestamps; a
// matching header line is skipped; extra columns such as ratings are
// ignored). Rows are ordered per user by timestamp, ties broken by file
// order. Users whose filtered sequence is shorter than 3 are dropped.
InteractionDataset load_interactions_csv(const std::string& path,
                                         const LoadOptions& options = {});

// Writes one `user_id,item_id,timestamp` row per interaction, timestamps
// numbered by position, so a round-trip reproduces identical sequences.
void save_interactions_csv(const InteractionDataset& dataset,
                           const std::string& path);

// Builds a dataset from already-clean index sequences (simulator output).
// Validates lengths and index ranges; no filtering is applied.
InteractionDataset dataset_from_sequences(
    std::vector<std::string> user_ids, std::vector<std::string> item_ids,
    std::vector<std::vector<std::uint32_t>> sequences);

// Raw per-user (item id, timestamp) rows grouped in file order with no
// filtering or splits; the low-level reader under load_interactions_csv.
struct RawInteractions {
  std::vector<std::string> user_ids;
  std::vector<std::vector<std::pair<std::string, std::int64_t>>> rows;
};
RawInteractions load_raw_interactions_csv(const std::string& path);

// Binary dataset cache, framed like the embedding container:
// magic "EMBD", version u8=1, u32le counts, u16le-length-prefixed ids.
void save_dataset_binary(const InteractionDataset& dataset,
                         const std::string& path);
InteractionDataset load_dataset_binary(const std::string& path);

/**
 * Entity -> class map backing the target kernel. Class indices are dense,
 * assigned in first-seen order.
 */
struct LabelCatalog {
  std::vector<std::string> class_names;
  std::vector<std::pair<std::string, std::uint32_t>> items; // id -> class
  std::unordered_map<std::string, std::uint32_t> by_id;

  std::size_t num_classes() const { return class_names.size(); }
};

// CSV of `item_id,class_id`. Re-listing an item with the same class is
// idempotent; a conflicting class is an error.
LabelCatalog load_labels_csv(const std::string& path);

void save_labels_csv(const LabelCatalog& catalog, const std::string& path);

// Joins a catalog against an embedding table: (table row, class) pairs in
// catalog order. Throws LookupError if a labeled item has no embedding.
std::vector<std::pair<std::size_t, std::uint32_t>> bind_labels(
    const LabelCatalog& catalog, const EmbeddingTable& table);

// Sub-catalog of the items that do have embeddings, class indices
// re-densified in first-seen order (labels usually cover the raw catalog
// while tables cover the filtered one).
LabelCatalog restrict_to_table(const LabelCatalog& catalog,
                               const EmbeddingTable& table);

} // namespace embkit
