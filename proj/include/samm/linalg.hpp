#pragma once

#include "samm/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace samm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenpairs of a symmetric matrix, values sorted descending.
struct SymmetricEigen
{
  Vector values;
  Matrix vectors; // columns, matching `values`
};

namespace detail {

// Index of the component with the largest magnitude; the lowest index wins
// among (numerically) equal magnitudes.
inline Eigen::Index dominant_axis(const Vector& v)
{
  Eigen::Index best = 0;
  double best_abs = std::abs(v(0));
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    const double a = std::abs(v(k));
    if (a > best_abs * (1.0 + 1e-12) + 1e-300) {
      best = k;
      best_abs = a;
    }
  }
  return best;
}

} // namespace detail

/// Symmetric eigendecomposition with deterministic output conventions:
///   - eigenvalues sorted descending;
///   - each eigenvector's dominant component (largest |.|, lowest axis on
///     ties) is made positive;
///   - eigenvalues equal within `tie_tol * max(1, |lambda|_max)` are ordered
///     by ascending dominant axis.
inline SymmetricEigen eigen_descending(const Matrix& sym, double tie_tol = 1e-12)
{
  if (sym.rows() != sym.cols())
    throw InvalidInput("eigen_descending: matrix is not square");
  const Eigen::Index d = sym.rows();
  SymmetricEigen out;
  if (d == 0)
    return out;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigen_descending: eigensolver did not converge");

  const Vector& vals = solver.eigenvalues();
  Matrix vecs = solver.eigenvectors();

  std::vector<Eigen::Index> axis(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    Vector col = vecs.col(k);
    const Eigen::Index a = detail::dominant_axis(col);
    if (col(a) < 0.0)
      vecs.col(k) = -col;
    axis[static_cast<std::size_t>(k)] = a;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return vals(a) > vals(b);
  });

  // Group runs of tied values, then order each run by dominant axis.
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t stop = start + 1;
    while (stop < order.size() &&
           vals(order[stop - 1]) - vals(order[stop]) <= tie_tol * scale)
      ++stop;
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(stop),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return axis[static_cast<std::size_t>(a)] <
                              axis[static_cast<std::size_t>(b)];
                     });
    start = stop;
  }

  out.values.resize(d);
  out.vectors.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    out.values(k) = vals(order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = vecs.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

inline bool is_symmetric(const Matrix& a, double tol = 1e-8)
{
  if (a.rows() != a.cols())
    return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Orthogonal projector onto the span of the columns of an orthonormal basis.
inline Matrix projector_from_basis(const Matrix& basis)
{
  return basis * basis.transpose();
}

/// Largest singular value.
inline double spectral_norm(const Matrix& a)
{
  if (a.size() == 0)
    return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

/// Sum of the `m` largest positive eigenvalues of a symmetric matrix.
inline double top_positive_eigen_sum(const Matrix& sym, Eigen::Index m)
{
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericError("top_positive_eigen_sum: eigensolver did not converge");
  const Vector& vals = solver.eigenvalues(); // ascending
  double sum = 0.0;
  for (Eigen::Index k = 0; k < m && k < vals.size(); ++k) {
    const double v = vals(vals.size() - 1 - k);
    if (v <= 0.0)
      break;
    sum += v;
  }
  return sum;
}

} // namespace samm
