#include "samm/kernels.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace samm;

TEST(KernelEval, LinearDecayValues)
{
  EXPECT_EQ(kernel_eval(KernelFamily::linear_decay, 1.0), 0.0);
  EXPECT_EQ(kernel_eval(KernelFamily::linear_decay, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::linear_decay, 0.25), 0.75);
  EXPECT_EQ(kernel_eval(KernelFamily::linear_decay, 3.0), 0.0);
}

TEST(KernelEval, QuarticValues)
{
  EXPECT_EQ(kernel_eval(KernelFamily::quartic, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::quartic, 0.5), 0.25);
  EXPECT_EQ(kernel_eval(KernelFamily::quartic, 1.0), 0.0);
}

TEST(KernelEval, RejectsBadArguments)
{
  EXPECT_THROW(kernel_eval(KernelFamily::linear_decay, std::nan("")), InvalidInput);
  EXPECT_THROW(kernel_eval(KernelFamily::linear_decay, INFINITY), InvalidInput);
  EXPECT_THROW(kernel_eval(KernelFamily::quartic, -0.1), InvalidInput);
}

TEST(KernelEval, PositiveInsideAndNonIncreasing)
{
  for (auto fam : {KernelFamily::linear_decay, KernelFamily::quartic}) {
    double prev = kernel_eval(fam, 0.0);
    for (int k = 1; k <= 1000; ++k) {
      const double t = k / 1000.0;
      const double v = kernel_eval(fam, t);
      EXPECT_LE(v, prev);
      if (t < 1.0) {
        EXPECT_GT(v, 0.0);
      }
      prev = v;
    }
  }
}

TEST(KernelEval, NamesRoundTrip)
{
  EXPECT_EQ(kernel_from_string(to_string(KernelFamily::quartic)), KernelFamily::quartic);
  EXPECT_EQ(kernel_from_string("linear_decay"), KernelFamily::linear_decay);
  EXPECT_THROW(kernel_from_string("gaussian"), InvalidInput);
}

TEST(Weights, IsotropicBall)
{
  Matrix X(3, 2);
  X << 0, 0, 0.3, 0.4, 1, 1;
  const Vector w = weights(MetricShape::isotropic(2, 1.0), X, 0);
  EXPECT_EQ(w(0), 1.0);
  EXPECT_NEAR(w(1), 1.0 - 0.25, 1e-15);
  EXPECT_EQ(w(2), 0.0);
}

TEST(Weights, CoincidentPointGetsPeakWeight)
{
  Matrix X(2, 3);
  X << 1, 2, 3, 1, 2, 3;
  MetricShape s{Matrix::Identity(3, 3) * 0.3, 0.4, 0.5};
  EXPECT_EQ(weights(s, X, 0)(1), kernel_eval(KernelFamily::linear_decay, 0.0));
}

TEST(Weights, HandEvaluatedAnisotropicCase)
{
  // argument 0.25 * (1 + 1/0.25) = 1.25, outside the support
  Matrix X(2, 1);
  X << 0, 0.5;
  MetricShape s{Matrix::Ones(1, 1), 0.5, 1.0};
  EXPECT_EQ(weights(s, X, 0)(1), 0.0);
  s.rho = 1.0; // argument 0.5
  EXPECT_DOUBLE_EQ(weights(s, X, 0)(1), 0.5);
}

TEST(Weights, RejectsInvalidShape)
{
  Matrix X = Matrix::Zero(3, 2);
  MetricShape bad{Matrix::Identity(2, 2) * 1.5, 1.0, 1.0};
  EXPECT_THROW(weights(bad, X, 0), InvalidInput);
  MetricShape bad_rho{Matrix::Zero(2, 2), 0.0, 1.0};
  EXPECT_THROW(weights(bad_rho, X, 0), InvalidInput);
  EXPECT_THROW(weights(MetricShape::isotropic(2, 1.0), X, 5), InvalidInput);
}

namespace {

MetricShape random_shape(Eigen::Index d, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Matrix q = oracle::random_orthogonal(d, rng);
  Vector ev(d);
  for (Eigen::Index k = 0; k < d; ++k)
    ev(k) = u(rng);
  return MetricShape{q * ev.asDiagonal() * q.transpose(), 0.2 + 0.8 * u(rng), 0.5 + u(rng)};
}

} // namespace

TEST(WeightsProperty, Symmetric)
{
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const MetricShape s = random_shape(3, rng);
    const Matrix X = oracle::random_matrix(15, 3, rng) * 0.4;
    Matrix W(15, 15);
    for (Eigen::Index i = 0; i < 15; ++i)
      W.col(i) = weights(s, X, i);
    EXPECT_LE((W - W.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(WeightsProperty, LargerRhoNeverDecreasesWeights)
{
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    MetricShape s = random_shape(4, rng);
    const Matrix X = oracle::random_matrix(20, 4, rng) * 0.5;
    s.rho = 0.3;
    const Vector w_small = weights(s, X, 0);
    s.rho = 0.9;
    const Vector w_big = weights(s, X, 0);
    EXPECT_TRUE((w_big.array() >= w_small.array() - 1e-15).all());
  }
}

TEST(WeightsProperty, SupportMatchesQuadraticForm)
{
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const MetricShape s = random_shape(3, rng);
    const Matrix X = oracle::random_matrix(30, 3, rng) * 0.6;
    const Matrix metric = (Matrix::Identity(3, 3) + s.pi_hat / (s.rho * s.rho)) / (s.h * s.h);
    const Vector w = weights(s, X, 2);
    for (Eigen::Index j = 0; j < 30; ++j) {
      const Vector dx = (X.row(j) - X.row(2)).transpose();
      const double q = dx.dot(metric * dx);
      EXPECT_EQ(w(j) > 0.0, q < 1.0 - 1e-12) << "q = " << q;
      EXPECT_NEAR(w(j), std::max(0.0, 1.0 - q), 1e-12);
    }
  }
}
