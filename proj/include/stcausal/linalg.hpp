#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace stc {

// Dense row-major matrix. For parameter tensors the convention is (in x out):
// projecting a row vector h gives s = h * W.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

  double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }
  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// y += a * x
inline void axpy(double a, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

// out = h * W for one row vector h of length W.rows
inline void project_row(const double* h, const Matrix& w, double* out) {
  std::fill(out, out + w.cols, 0.0);
  for (int i = 0; i < w.rows; ++i) {
    const double hi = h[i];
    if (hi == 0.0) continue;
    axpy(hi, w.row(i), out, w.cols);
  }
}

inline double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double cosine_similarity(const double* a, const double* b, int n) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (int i = 0; i < n; ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

}  // namespace stc
