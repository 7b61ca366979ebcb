#pragma once

// Lets RFunc serve as an Eigen scalar so exact and floating code paths share
// dense matrix types.

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hp3/algebra/rfunc.hpp"

namespace Eigen {

template <>
struct NumTraits<hp3::RFunc> : GenericNumTraits<hp3::RFunc> {
  using Real = hp3::RFunc;
  using NonInteger = hp3::RFunc;
  using Nested = hp3::RFunc;
  using Literal = hp3::RFunc;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 16,
    MulCost = 16,
  };
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen

namespace hp3 {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Zero test used by the generic elimination: exact for RFunc, relative to
/// `scale` for floating types.
inline bool scalar_is_zero(const RFunc& v, double /*scale*/) { return v.is_zero(); }
inline bool scalar_is_zero(double v, double scale) { return std::abs(v) <= 1e-10 * std::max(1.0, scale); }

inline double scalar_magnitude(const RFunc&) { return 1.0; }
inline double scalar_magnitude(double v) { return std::abs(v); }

/// Thrown when a singular linear system has no solution.
class InconsistentSystem : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Solution of A x = b by Gauss-Jordan elimination: a particular solution
/// plus, for each free column, a kernel direction.
template <class Scalar>
struct LinearSolution {
  Vec<Scalar> particular;
  std::vector<int> free_columns;
  std::vector<Vec<Scalar>> kernel;  // one per free column
};

/// Exact for RFunc. Throws InconsistentSystem if b is not in the range of A.
template <class Scalar>
LinearSolution<Scalar> solve_linear(Mat<Scalar> a, Vec<Scalar> b) {
  const int rows = static_cast<int>(a.rows()), cols = static_cast<int>(a.cols());
  double scale = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) scale = std::max(scale, scalar_magnitude(a(i, j)));
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int piv = -1;
    double best = -1;
    for (int i = r; i < rows; ++i) {
      if (scalar_is_zero(a(i, c), scale)) continue;
      const double m = scalar_magnitude(a(i, c));
      if (m > best) {
        best = m;
        piv = i;
      }
      if constexpr (std::is_same_v<Scalar, RFunc>) break;
    }
    if (piv < 0) continue;
    a.row(r).swap(a.row(piv));
    std::swap(b(r), b(piv));
    const Scalar inv = Scalar(1) / a(r, c);
    for (int j = 0; j < cols; ++j) a(r, j) = a(r, j) * inv;
    b(r) = b(r) * inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || scalar_is_zero(a(i, c), scale)) continue;
      const Scalar f = a(i, c);
      for (int j = 0; j < cols; ++j) a(i, j) = a(i, j) - f * a(r, j);
      b(i) = b(i) - f * b(r);
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (int i = r; i < rows; ++i) {
    double bscale = 0;
    for (int k = 0; k < rows; ++k) bscale = std::max(bscale, scalar_magnitude(b(k)));
    if (!scalar_is_zero(b(i), std::max(scale, bscale))) throw InconsistentSystem("linear system is inconsistent");
  }
  LinearSolution<Scalar> out;
  out.particular = Vec<Scalar>::Constant(cols, Scalar(0));
  for (int i = 0; i < r; ++i) out.particular(pivot_col[i]) = b(i);
  for (int c = 0; c < cols; ++c) {
    if (std::find(pivot_col.begin(), pivot_col.end(), c) != pivot_col.end()) continue;
    out.free_columns.push_back(c);
    Vec<Scalar> k = Vec<Scalar>::Constant(cols, Scalar(0));
    k(c) = Scalar(1);
    for (int i = 0; i < r; ++i) k(pivot_col[i]) = -a(i, c);
    out.kernel.push_back(std::move(k));
  }
  return out;
}

/// Determinant by cofactor expansion along the first row (small sizes).
template <class Scalar>
Scalar determinant(const Mat<Scalar>& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) return Scalar(1);
  if (n == 1) return m(0, 0);
  Scalar out(0);
  for (int j = 0; j < n; ++j) {
    Mat<Scalar> minor(n - 1, n - 1);
    for (int i = 1; i < n; ++i)
      for (int k = 0, kk = 0; k < n; ++k)
        if (k != j) minor(i - 1, kk++) = m(i, k);
    const Scalar term = m(0, j) * determinant(minor);
    out = (j % 2 == 0) ? out + term : out - term;
  }
  return out;
}

}  // namespace hp3
