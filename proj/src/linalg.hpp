#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qnet::detail {

/// Dense solve by Gaussian elimination with partial pivoting. A is modified.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> A,
                                       std::vector<double> b) {
  const int n = static_cast<int>(A.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-14)
      throw std::runtime_error("singular linear system");
    std::swap(A[col], A[piv]);
    std::swap(b[col], b[piv]);
    for (int r = col + 1; r < n; ++r) {
      double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= A[r][c] * x[c];
    x[r] = s / A[r][r];
  }
  return x;
}

}  // namespace qnet::detail
