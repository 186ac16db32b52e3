#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace embkit {

/**
 * Immutable entity -> R^d embedding map; the toolkit's phi.
 *
 * Entity ids are opaque strings at the boundary and dense indices inside.
 * Vectors are stored as doubles in memory; the binary container rounds to
 * f32 on disk. Construction validates that every entry is finite, that ids
 * are unique, and (when a norm bound is declared) that every row satisfies
 * ||row||_2 <= bound.
 *
 * Safe to share across threads once constructed.
 */
class EmbeddingTable {
public:
  // Empty placeholder; every accessor throws until a real table is assigned.
  EmbeddingTable() = default;

  EmbeddingTable(std::vector<std::string> ids, std::vector<double> row_major,
                 std::size_t dim, std::optional<double> norm_bound = {});

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }

  std::span<const double> row(std::size_t i) const;
  double row_norm(std::size_t i) const;

  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const;

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const; // throws LookupError

  std::optional<double> norm_bound() const { return norm_bound_; }

  const std::vector<double>& values() const { return data_; }

private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
  std::size_t dim_ = 0;
  std::optional<double> norm_bound_;
};

// Text container: one `<id>\t<v1> <v2> ... <vd>` line per entity.
EmbeddingTable load_embeddings_text(const std::string& path);
void save_embeddings_text(const EmbeddingTable& table, const std::string& path);

// Binary container: magic "EMBK", version u8=1, u32le dim, u32le count, then
// per record (u16le id length, id bytes, dim f32le values).
EmbeddingTable load_embeddings_binary(const std::string& path);
void save_embeddings_binary(const EmbeddingTable& table,
                            const std::string& path);

// Sniffs the magic bytes and dispatches to the binary or text loader.
EmbeddingTable load_embeddings(const std::string& path);

// New table holding exactly `ids`, in that order. Every id must be present.
EmbeddingTable subset_by_ids(const EmbeddingTable& table,
                             const std::vector<std::string>& ids);

} // namespace embkit
