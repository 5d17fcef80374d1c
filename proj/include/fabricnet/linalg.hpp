#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fabricnet::linalg {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// A is n x n row-major. Returns false if a pivot falls below tol times the
// largest row magnitude (treated as singular).
inline bool solve(std::vector<double> a, std::vector<double> b, std::size_t n,
                  std::vector<double>& x, double tol = 1e-12) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return false;

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::fabs(a[perm[col] * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(a[perm[r] * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < tol * scale) return false;
    std::swap(perm[col], perm[pivot]);

    const std::size_t prow = perm[col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const std::size_t row = perm[r];
      const double f = a[row * n + col] / a[prow * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[row * n + c] -= f * a[prow * n + c];
      b[row] -= f * b[prow];
    }
  }

  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[perm[i]];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[perm[i] * n + c] * x[c];
    x[i] = acc / a[perm[i] * n + i];
  }
  return true;
}

}  // namespace fabricnet::linalg
