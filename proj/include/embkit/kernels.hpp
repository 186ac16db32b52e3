#pragma once

#include "embkit/embedding_table.hpp"
#include "embkit/linalg.hpp"

#include <cstdint>
#include <span>

namespace embkit {

// Inner-product kernel of rows i and j. Accumulates in double with a fixed
// summation order, so the value is identical no matter how it is batched.
double kernel(const EmbeddingTable& table, std::size_t i, std::size_t j);

/**
 * One tile of a Gram computation: the half-open [row_begin,row_end) x
 * [col_begin,col_end) window into a rows x cols index product, plus the tile
 * edge used to partition work.
 */
struct GramBlockSpec {
  std::size_t row_begin = 0;
  std::size_t row_end = 0;
  std::size_t col_begin = 0;
  std::size_t col_end = 0;
  std::size_t block_size = 128;

  void validate(std::size_t n_rows, std::size_t n_cols) const;
};

// Gram matrix over arbitrary row/column index sets: out(a,b) =
// kernel(rows[a], cols[b]). Tiles of `block_size` are distributed across
// workers; every entry is written once, so the result is bit-identical for
// any block size or thread count. Empty index sets yield an empty matrix.
Matrix gram(const EmbeddingTable& table, std::span<const std::size_t> rows,
            std::span<const std::size_t> cols, std::size_t block_size = 128);

// Computes a single tile, for callers that schedule their own blocks.
Matrix gram_block(const EmbeddingTable& table,
                  std::span<const std::size_t> rows,
                  std::span<const std::size_t> cols, const GramBlockSpec& spec);

// Two-layer-MLP tangent-kernel transform of the pair angle:
//   1 - acos(clamped cosine) / pi, in [0, 1].
// Rows with zero norm are rejected: an undefined cosine signals corrupt
// embeddings rather than orthogonality.
double arc_cosine_ntk(const EmbeddingTable& table, std::size_t i,
                      std::size_t j);

// Applies one seeded random orthogonal matrix to every row. Inner products
// are preserved, which makes this the standard fixture for invariance tests.
EmbeddingTable random_rotation(const EmbeddingTable& table, std::uint64_t seed);

} // namespace embkit
