#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fockforge/error.hpp"
#include "fockforge/matrix.hpp"

namespace fockforge {

struct EigDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

inline constexpr int kJacobiMaxSweeps = 50;
inline constexpr double kDefaultEigenFloor = 1e-7;

/// Cyclic Jacobi. Stops when the off-diagonal Frobenius norm drops below
/// 1e-12 of the input's Frobenius norm.
inline EigDecomposition jacobi_eigh(const SymMatrix& input) {
  const std::size_t n = input.size();
  if (n == 0) throw DimensionError("jacobi_eigh: empty matrix");
  Matrix a = input.matrix();
  for (double v : a.data())
    if (!std::isfinite(v)) throw Error("jacobi_eigh: non-finite matrix element");

  // Rows of vt are eigenvectors; transposed at the end.
  Matrix vt = Matrix::identity(n);
  double norm2 = 0.0;
  for (double v : a.data()) norm2 += v * v;
  const double target = 1e-12 * std::sqrt(norm2);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (off_norm() <= target) break;
    if (sweep == kJacobiMaxSweeps) throw Error("jacobi_eigh: no convergence after 50 sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        double* rp = a.row(p).data();
        double* rq = a.row(q).data();
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = rp[k], akq = rq[k];
          const double np = c * akp - s * akq;
          const double nq = s * akp + c * akq;
          rp[k] = np;
          rq[k] = nq;
          a(k, p) = np;
          a(k, q) = nq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        double* vp = vt.row(p).data();
        double* vq = vt.row(q).data();
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k], y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = vt(order[k], r);
  }
  return out;
}

struct Orthogonalizer {
  SymMatrix x;           // V diag(lambda^{-1/2}) V^T over retained eigenvalues
  Matrix retained;       // x restricted to the retained subspace (n x m)
  std::size_t dropped = 0;
};

/// Symmetric orthogonalization with an eigenvalue floor.
inline Orthogonalizer orthogonalizer(const SymMatrix& s, double floor = kDefaultEigenFloor) {
  const auto eig = jacobi_eigh(s);
  const std::size_t n = s.size();
  if (eig.values.front() < -1e-10) throw Error("inv_sqrt: matrix has a negative eigenvalue");
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < n; ++k)
    if (eig.values[k] >= floor) keep.push_back(k);
  if (keep.empty()) throw Error("inv_sqrt: all eigenvalues below floor");

  Matrix x(n, n);
  Matrix r(n, keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const std::size_t k = keep[c];
    const double w = 1.0 / std::sqrt(eig.values[k]);
    for (std::size_t i = 0; i < n; ++i) {
      r(i, c) = w * eig.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) x(i, j) += w * eig.vectors(i, k) * eig.vectors(j, k);
    }
  }
  return {SymMatrix::symmetrized(x), std::move(r), n - keep.size()};
}

inline SymMatrix inv_sqrt(const SymMatrix& s, double floor = kDefaultEigenFloor) { return orthogonalizer(s, floor).x; }

} // namespace fockforge
