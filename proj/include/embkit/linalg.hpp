#pragma once

#include "embkit/rng.hpp"

#include <cstddef>
#include <vector>

namespace embkit {

// Dense row-major double matrix. Sizes in this toolkit stay small (at most a
// few thousand rows for Gram blocks, d x d for rotations), so no effort is
// spent on anything beyond clean loops.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  static Matrix identity(std::size_t n);
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// Largest |Q^T Q - I| entry; the orthogonality defect of Q's columns.
double orthogonality_defect(const Matrix& q);

// Random orthogonal d x d matrix: seeded Gaussian entries, then modified
// Gram-Schmidt with a second re-orthogonalization pass.
Matrix random_orthogonal(std::size_t d, Rng& rng);

// LU solve with partial pivoting. Throws IllConditionedError on a
// numerically singular system.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);
Matrix invert(Matrix a);

// 1-norm condition estimate ||A||_1 * ||A^-1||_1 (exact inverse; fine at
// these sizes).
double condition_1norm(const Matrix& a);

// Eigenvalues of a symmetric matrix via cyclic Jacobi, ascending order.
std::vector<double> sym_eigenvalues(Matrix a);

// Thin SVD of a (rows >= cols) via one-sided Jacobi: a = u * diag(sigma) * v^T.
struct Svd {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;
};
Svd svd(const Matrix& a);

// Orthogonal Q minimizing ||from * Q - to||_F (classic Procrustes through the
// SVD of from^T * to). Reflections are allowed.
Matrix procrustes_rotation(const Matrix& from, const Matrix& to);

} // namespace embkit
