#include "embkit/linalg.hpp"

#include "embkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace embkit {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw DomainError("matmul: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j)
        out.at(i, j) += aik * b.at(k, j);
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
  return out;
}

double orthogonality_defect(const Matrix& q) {
  double worst = 0.0;
  for (std::size_t i = 0; i < q.cols; ++i) {
    for (std::size_t j = i; j < q.cols; ++j) {
      double dot = 0.0;
      for (std::size_t r = 0; r < q.rows; ++r) dot += q.at(r, i) * q.at(r, j);
      const double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::fabs(dot - target));
    }
  }
  return worst;
}

namespace {

// One modified Gram-Schmidt sweep over the columns of m.
void mgs_pass(Matrix& m) {
  const std::size_t n = m.cols;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t r = 0; r < m.rows; ++r) dot += m.at(r, k) * m.at(r, j);
      for (std::size_t r = 0; r < m.rows; ++r) m.at(r, j) -= dot * m.at(r, k);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) norm += m.at(r, j) * m.at(r, j);
    norm = std::sqrt(norm);
    if (norm < 1e-12)
      throw DomainError("gram-schmidt: rank-deficient input");
    for (std::size_t r = 0; r < m.rows; ++r) m.at(r, j) /= norm;
  }
}

} // namespace

Matrix random_orthogonal(std::size_t d, Rng& rng) {
  if (d == 0) throw DomainError("random_orthogonal: d must be >= 1");
  Matrix q(d, d);
  for (double& x : q.data) x = rng.next_gaussian();
  // A second pass removes the O(eps * cond) residue of the first.
  mgs_pass(q);
  mgs_pass(q);
  return q;
}

namespace {

struct Lu {
  Matrix lu;
  std::vector<std::size_t> perm;
};

Lu lu_factor(Matrix a) {
  if (a.rows != a.cols) throw DomainError("lu: matrix not square");
  const std::size_t n = a.rows;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::fabs(a.at(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::fabs(a.at(i, k));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (best < 1e-300)
      throw IllConditionedError("lu: numerically singular matrix");
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j)
        std::swap(a.at(k, j), a.at(pivot, j));
      std::swap(perm[k], perm[pivot]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      a.at(i, k) /= a.at(k, k);
      const double lik = a.at(i, k);
      for (std::size_t j = k + 1; j < n; ++j) a.at(i, j) -= lik * a.at(k, j);
    }
  }
  return {std::move(a), std::move(perm)};
}

std::vector<double> lu_solve(const Lu& f, const std::vector<double>& b) {
  const std::size_t n = f.lu.rows;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu.at(i, j) * x[j];
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= f.lu.at(ii, j) * x[j];
    x[ii] /= f.lu.at(ii, ii);
  }
  return x;
}

} // namespace

std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
  if (a.rows != b.size()) throw DomainError("solve: rhs size mismatch");
  return lu_solve(lu_factor(std::move(a)), b);
}

Matrix invert(Matrix a) {
  const std::size_t n = a.rows;
  const Lu f = lu_factor(std::move(a));
  Matrix inv(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const std::vector<double> col = lu_solve(f, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv.at(i, j) = col[i];
  }
  return inv;
}

namespace {
double norm_1(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) col += std::fabs(a.at(i, j));
    best = std::max(best, col);
  }
  return best;
}
} // namespace

double condition_1norm(const Matrix& a) {
  Matrix inv;
  try {
    inv = invert(a);
  } catch (const IllConditionedError&) {
    return std::numeric_limits<double>::infinity();
  }
  return norm_1(a) * norm_1(inv);
}

std::vector<double> sym_eigenvalues(Matrix a) {
  if (a.rows != a.cols) throw DomainError("eigen: matrix not square");
  const std::size_t n = a.rows;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-26) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a.at(i, p);
          const double aiq = a.at(i, q);
          a.at(i, p) = c * aip - s * aiq;
          a.at(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a.at(p, i);
          const double aqi = a.at(q, i);
          a.at(p, i) = c * api - s * aqi;
          a.at(q, i) = s * api + c * aqi;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a.at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

Svd svd(const Matrix& a) {
  if (a.rows < a.cols) throw DomainError("svd: expects rows >= cols");
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;

  // One-sided Jacobi: rotate column pairs of w until mutually orthogonal,
  // accumulating the rotations into v. Then w = u * diag(sigma).
  Matrix w = a;
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    bool converged = true;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          app += w.at(i, p) * w.at(i, p);
          aqq += w.at(i, q) * w.at(i, q);
          apq += w.at(i, p) * w.at(i, q);
        }
        if (std::fabs(apq) <= 1e-15 * std::sqrt(app * aqq) + 1e-300) continue;
        converged = false;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(tau * tau + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < m; ++i) {
          const double wip = w.at(i, p);
          const double wiq = w.at(i, q);
          w.at(i, p) = c * wip - s * wiq;
          w.at(i, q) = s * wip + c * wiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v.at(i, p);
          const double viq = v.at(i, q);
          v.at(i, p) = c * vip - s * viq;
          v.at(i, q) = s * vip + c * viq;
        }
      }
    }
    if (converged) break;
  }

  Svd out;
  out.sigma.assign(n, 0.0);
  out.u = Matrix(m, n);
  out.v = std::move(v);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) norm += w.at(i, j) * w.at(i, j);
    norm = std::sqrt(norm);
    out.sigma[j] = norm;
    if (norm > 0.0)
      for (std::size_t i = 0; i < m; ++i) out.u.at(i, j) = w.at(i, j) / norm;
  }
  return out;
}

Matrix procrustes_rotation(const Matrix& from, const Matrix& to) {
  if (from.rows != to.rows || from.cols != to.cols)
    throw DomainError("procrustes: shape mismatch");
  const Matrix m = matmul(transpose(from), to);
  const Svd f = svd(m);
  return matmul(f.u, transpose(f.v));
}

} // namespace embkit
