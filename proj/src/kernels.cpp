#include "embkit/kernels.hpp"

#include "embkit/errors.hpp"
#include "embkit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace embkit {

double kernel(const EmbeddingTable& table, std::size_t i, std::size_t j) {
  const auto a = table.row(i);
  const auto b = table.row(j);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

void GramBlockSpec::validate(std::size_t n_rows, std::size_t n_cols) const {
  if (row_begin > row_end || col_begin > col_end)
    throw ValidationError("gram block: inverted range");
  if (row_end > n_rows || col_end > n_cols)
    throw ValidationError("gram block: range outside index space");
  if (block_size == 0)
    throw ValidationError("gram block: block_size must be >= 1");
}

Matrix gram_block(const EmbeddingTable& table,
                  std::span<const std::size_t> rows,
                  std::span<const std::size_t> cols,
                  const GramBlockSpec& spec) {
  spec.validate(rows.size(), cols.size());
  Matrix out(spec.row_end - spec.row_begin, spec.col_end - spec.col_begin);
  for (std::size_t a = spec.row_begin; a < spec.row_end; ++a) {
    for (std::size_t b = spec.col_begin; b < spec.col_end; ++b) {
      out.at(a - spec.row_begin, b - spec.col_begin) =
          kernel(table, rows[a], cols[b]);
    }
  }
  return out;
}

Matrix gram(const EmbeddingTable& table, std::span<const std::size_t> rows,
            std::span<const std::size_t> cols, std::size_t block_size) {
  if (block_size == 0)
    throw ValidationError("gram: block_size must be >= 1");
  for (std::size_t r : rows)
    if (r >= table.size()) throw LookupError("gram: row index out of range");
  for (std::size_t c : cols)
    if (c >= table.size()) throw LookupError("gram: col index out of range");

  Matrix out(rows.size(), cols.size());
  if (rows.empty() || cols.empty()) return out;

  const std::size_t col_tiles = (cols.size() + block_size - 1) / block_size;
  const std::size_t row_tiles = (rows.size() + block_size - 1) / block_size;
  const std::size_t tiles = row_tiles * col_tiles;

  parallel_for(0, tiles, 1, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      const std::size_t tr = t / col_tiles;
      const std::size_t tc = t % col_tiles;
      const std::size_t r0 = tr * block_size;
      const std::size_t r1 = std::min(rows.size(), r0 + block_size);
      const std::size_t c0 = tc * block_size;
      const std::size_t c1 = std::min(cols.size(), c0 + block_size);
      for (std::size_t a = r0; a < r1; ++a)
        for (std::size_t b = c0; b < c1; ++b)
          out.at(a, b) = kernel(table, rows[a], cols[b]);
    }
  });
  return out;
}

double arc_cosine_ntk(const EmbeddingTable& table, std::size_t i,
                      std::size_t j) {
  const double ni = table.row_norm(i);
  const double nj = table.row_norm(j);
  if (ni == 0.0 || nj == 0.0)
    throw DomainError("arc_cosine_ntk: zero-norm row, cosine undefined");
  // Floating-point cosines can land just outside [-1, 1].
  const double cosine = std::clamp(kernel(table, i, j) / (ni * nj), -1.0, 1.0);
  return 1.0 - std::acos(cosine) / std::numbers::pi;
}

EmbeddingTable random_rotation(const EmbeddingTable& table,
                               std::uint64_t seed) {
  const std::size_t d = table.dim();
  Rng rng(derive_seed(seed, "random-rotation"));
  const Matrix q = random_orthogonal(d, rng);

  std::vector<double> rotated(table.size() * d, 0.0);
  parallel_for(0, table.size(), 64, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = table.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += row[k] * q.at(k, j);
        rotated[i * d + j] = acc;
      }
    }
  });
  return EmbeddingTable(table.ids(), std::move(rotated), d,
                        table.norm_bound());
}

} // namespace embkit
