#pragma once

#include "samm/basis.hpp"
#include "samm/error.hpp"
#include "samm/kernels.hpp"
#include "samm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace samm {

/// Design matrix (rows are observations) and response vector.
struct Dataset
{
  Matrix X;
  Vector Y;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }

  void validate() const
  {
    if (X.cols() < 1)
      throw InvalidInput("dataset must have at least one predictor column");
    if (X.rows() != Y.size())
      throw InvalidInput("dataset: X has " + std::to_string(X.rows()) + " rows but Y has " +
                         std::to_string(Y.size()) + " entries");
    if (X.rows() < X.cols() + 2)
      throw InvalidInput("dataset: need n >= d + 2 observations (n = " +
                         std::to_string(X.rows()) + ", d = " + std::to_string(X.cols()) + ")");
    if (!X.allFinite() || !Y.allFinite())
      throw InvalidInput("dataset contains non-finite values");
  }
};

/// Local-linear fitted values and gradients at every design point.
struct GradientField
{
  Vector fitted;    // n
  Matrix gradients; // d x n, column i is the gradient estimate at X_i
};

/// Column l is the averaged gradient functional for basis vector l.
struct BetaMatrix
{
  Matrix betas; // d x L

  Eigen::Index dim() const { return betas.rows(); }
  Eigen::Index count() const { return betas.cols(); }
};

namespace detail {

inline Vector solve_gram(Matrix& gram, const Vector& rhs, double ridge, std::size_t point)
{
  const Eigen::Index p = gram.rows();
  if (ridge > 0.0)
    gram.diagonal().array() += ridge;

  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-14)
    return llt.solve(rhs);

  if (ridge == 0.0)
    throw SingularSystem(point,
                         "local_linear_fit: singular Gram matrix at point " + std::to_string(point) +
                           " (too few neighbours in the kernel support)");

  // Eigenvalue-clipped pseudo-inverse.
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success)
    throw NumericError("local_linear_fit: eigensolver failed at point " + std::to_string(point));
  const double cutoff = 1e-12 * std::max(gram.trace(), 0.0);
  Vector inv = Vector::Zero(p);
  for (Eigen::Index k = 0; k < p; ++k)
    if (es.eigenvalues()(k) > cutoff)
      inv(k) = 1.0 / es.eigenvalues()(k);
  const Matrix& V = es.eigenvectors();
  return V * inv.asDiagonal() * (V.transpose() * rhs);
}

} // namespace detail

/// Weighted local-linear fit at every design point. The Gram matrix at X_i is
/// sum_j (1, X_ij)(1, X_ij)^T w_ij + ridge * I, the moment vector is
/// sum_j Y_j (1, X_ij) w_ij; j = i is included with weight K(0).
inline GradientField local_linear_fit(const Dataset& data,
                                      const MetricShape& shape,
                                      double ridge,
                                      KernelFamily family = KernelFamily::linear_decay)
{
  data.validate();
  shape.validate();
  if (!(ridge >= 0.0) || !std::isfinite(ridge))
    throw InvalidInput("local_linear_fit: ridge must be non-negative and finite");
  if (shape.dim() != data.d())
    throw InvalidInput("local_linear_fit: metric dimension does not match the data");

  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  const Matrix Zt = scaled_coordinates(shape, data.X).transpose();
  const Matrix Xt = data.X.transpose();

  GradientField out{Vector(n), Matrix(d, n)};
  Matrix design(n, d + 1);
  Vector w(n);
  Vector y(n);
  Matrix gram(d + 1, d + 1);
  Vector moment(d + 1);

  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double wij = kernel_eval(family, (Zt.col(j) - Zt.col(i)).squaredNorm());
      if (wij <= 0.0)
        continue;
      design(k, 0) = 1.0;
      design.row(k).tail(d) = (Xt.col(j) - Xt.col(i)).transpose();
      w(k) = wij;
      y(k) = data.Y(j);
      ++k;
    }
    const auto D = design.topRows(k);
    const Matrix weighted = w.head(k).asDiagonal() * D;
    gram.noalias() = D.transpose() * weighted;
    moment.noalias() = weighted.transpose() * y.head(k);

    const Vector coef = detail::solve_gram(gram, moment, ridge, static_cast<std::size_t>(i));
    out.fitted(i) = coef(0);
    out.gradients.col(i) = coef.tail(d);
  }
  return out;
}

/// betas = (1/n) * gradients * psi, summed over points in ascending order.
inline BetaMatrix compute_betas(const GradientField& grad, const Matrix& psi)
{
  const Eigen::Index n = grad.gradients.cols();
  if (psi.rows() != n)
    throw InvalidInput("compute_betas: basis has " + std::to_string(psi.rows()) +
                       " rows, expected " + std::to_string(n));
  const Eigen::Index d = grad.gradients.rows();
  const Eigen::Index L = psi.cols();
  BetaMatrix out{Matrix::Zero(d, L)};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index l = 0; l < L; ++l) {
    Vector acc = Vector::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i)
      acc += grad.gradients.col(i) * psi(i, l);
    out.betas.col(l) = acc * inv_n;
  }
  return out;
}

inline BetaMatrix compute_betas(const GradientField& grad, const BasisMatrix& psi)
{
  return compute_betas(grad, psi.psi);
}

/// Smallest h such that every point has at least d + 1 other points within
/// Euclidean distance h.
inline double data_driven_h1(const Matrix& X)
{
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n <= d + 1)
    throw InvalidInput("data_driven_h1: need more than d + 1 points");
  const auto need = static_cast<std::size_t>(d + 1);
  const Matrix Xt = X.transpose();
  std::vector<double> dist(static_cast<std::size_t>(n - 1));
  double h = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t k = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i)
        dist[k++] = (Xt.col(j) - Xt.col(i)).squaredNorm();
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(need - 1), dist.end());
    h = std::max(h, dist[need - 1]);
  }
  return std::sqrt(h);
}

inline double data_driven_h1(const Dataset& data)
{
  if (data.n() <= data.d() + 1)
    throw InvalidInput("data_driven_h1: need more than d + 1 points");
  return data_driven_h1(data.X);
}

} // namespace samm
