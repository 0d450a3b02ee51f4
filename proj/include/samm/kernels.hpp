#pragma once

#include "samm/error.hpp"
#include "samm/linalg.hpp"

#include <cmath>
#include <string>
#include <string_view>

namespace samm {

/// Kernel profiles evaluated on the squared scaled distance t. Both are
/// normalized to K(0) = 1 and vanish for t >= 1.
enum class KernelFamily
{
  linear_decay, // (1 - t)_+
  quartic,      // (1 - t)_+^2
};

inline std::string_view to_string(KernelFamily k)
{
  switch (k) {
    case KernelFamily::linear_decay:
      return "linear_decay";
    case KernelFamily::quartic:
      return "quartic";
  }
  return "unknown";
}

inline KernelFamily kernel_from_string(std::string_view name)
{
  if (name == "linear_decay")
    return KernelFamily::linear_decay;
  if (name == "quartic")
    return KernelFamily::quartic;
  throw InvalidInput("unknown kernel family '" + std::string(name) + "'");
}

inline double kernel_eval(KernelFamily family, double t)
{
  if (!std::isfinite(t))
    throw InvalidInput("kernel_eval: argument is not finite");
  if (t < 0.0)
    throw InvalidInput("kernel_eval: argument is negative");
  if (t >= 1.0)
    return 0.0;
  const double u = 1.0 - t;
  return family == KernelFamily::quartic ? u * u : u;
}

/// Anisotropic neighborhood metric (I + rho^-2 Pi) / h^2 built from the
/// current structural estimate Pi.
struct MetricShape
{
  Matrix pi_hat;
  double rho = 1.0;
  double h = 1.0;

  static MetricShape isotropic(Eigen::Index d, double h)
  {
    return MetricShape{Matrix::Zero(d, d), 1.0, h};
  }

  Eigen::Index dim() const { return pi_hat.rows(); }

  void validate() const
  {
    if (!(rho > 0.0 && rho <= 1.0))
      throw InvalidInput("MetricShape: rho must lie in (0, 1]");
    if (!(h > 0.0) || !std::isfinite(h))
      throw InvalidInput("MetricShape: bandwidth h must be positive and finite");
    if (!is_symmetric(pi_hat))
      throw InvalidInput("MetricShape: pi_hat is not symmetric");
    if (pi_hat.size() == 0)
      return;
    Eigen::SelfAdjointEigenSolver<Matrix> es(pi_hat, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 || es.eigenvalues().maxCoeff() > 1.0 + 1e-10)
      throw InvalidInput("MetricShape: pi_hat eigenvalues must lie in [0, 1]");
  }

  /// Lower Cholesky factor F of the metric, so the scaled squared distance
  /// of a displacement x is |F^T x|^2.
  Matrix metric_factor() const
  {
    const Eigen::Index d = dim();
    Matrix metric = Matrix::Identity(d, d) + pi_hat / (rho * rho);
    metric /= h * h;
    Eigen::LLT<Matrix> llt(metric);
    if (llt.info() != Eigen::Success)
      throw NumericError("MetricShape: metric is not positive definite");
    return llt.matrixL();
  }
};

/// Rows of X mapped so that |Z_j - Z_i|^2 equals the scaled squared
/// distance between X_i and X_j under `shape`.
inline Matrix scaled_coordinates(const MetricShape& shape, const Matrix& X)
{
  if (X.cols() != shape.dim())
    throw InvalidInput("scaled_coordinates: dimension mismatch between X and pi_hat");
  return X * shape.metric_factor();
}

/// w_ij = K(X_ij^T (I + rho^-2 Pi) X_ij / h^2) for all j, with X_ij = X_j - X_i.
inline Vector weights(const MetricShape& shape,
                      const Matrix& X,
                      Eigen::Index i,
                      KernelFamily family = KernelFamily::linear_decay)
{
  shape.validate();
  if (i < 0 || i >= X.rows())
    throw InvalidInput("weights: point index out of range");
  if (!X.allFinite())
    throw InvalidInput("weights: X has non-finite entries");
  const Matrix Z = scaled_coordinates(shape, X);
  Vector w(X.rows());
  for (Eigen::Index j = 0; j < X.rows(); ++j)
    w(j) = kernel_eval(family, (Z.row(j) - Z.row(i)).squaredNorm());
  return w;
}

} // namespace samm
