#pragma once

// Synthetic multi-index models and the Monte Carlo replication harness.

#include "samm/error.hpp"
#include "samm/estimator.hpp"
#include "samm/linalg.hpp"
#include "samm/locallinear.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace samm {

enum class Example
{
  ex1 = 1, // single index, uniform [-1, 1]^5
  ex2 = 2, // two indices, uniform [-40, 40]^d
  ex3 = 3, // three indices, uniform [0, 20]^5
  ex4 = 4, // nonlinear autoregression embedded in R^6
};

inline Example example_from_int(int id)
{
  if (id < 1 || id > 4)
    throw InvalidInput("unknown example " + std::to_string(id) + " (expected 1..4)");
  return static_cast<Example>(id);
}

struct SimSpec
{
  Example example = Example::ex1;
  Eigen::Index n = 400;
  Eigen::Index d = 5;
  double sigma = 0.5;
  std::size_t reps = 50;
  std::uint64_t seed = 1;

  static SimSpec defaults(Example ex)
  {
    SimSpec s;
    s.example = ex;
    switch (ex) {
      case Example::ex1:
        s.n = 400, s.d = 5, s.sigma = 0.5;
        break;
      case Example::ex2:
        s.n = 300, s.d = 4, s.sigma = 0.1;
        break;
      case Example::ex3:
        s.n = 250, s.d = 5, s.sigma = 10.0;
        break;
      case Example::ex4:
        s.n = 300, s.d = 6, s.sigma = 0.2;
        break;
    }
    return s;
  }

  Eigen::Index m_star() const
  {
    switch (example) {
      case Example::ex1:
        return 1;
      case Example::ex2:
        return 2;
      case Example::ex3:
      case Example::ex4:
        return 3;
    }
    return 1;
  }

  void validate() const
  {
    switch (example) {
      case Example::ex1:
      case Example::ex3:
        if (d != 5)
          throw InvalidInput("example " + std::to_string(static_cast<int>(example)) + " requires d = 5");
        break;
      case Example::ex2:
        if (d < 2)
          throw InvalidInput("example 2 requires d >= 2");
        break;
      case Example::ex4:
        if (d != 6)
          throw InvalidInput("example 4 requires d = 6");
        break;
    }
    if (n < d + 2)
      throw InvalidInput("simulation: need n >= d + 2");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
      throw InvalidInput("simulation: sigma must be non-negative");
    if (reps < 1)
      throw InvalidInput("simulation: reps must be positive");
  }
};

/// Independent generator per (seed, replication, purpose). Uniform and normal
/// variates are derived from raw 64-bit draws so streams are identical on
/// every platform.
class StreamRng
{
public:
  enum Purpose : std::uint64_t
  {
    design = 1,
    noise = 2,
  };

  StreamRng(std::uint64_t seed, std::uint64_t rep, Purpose purpose)
    : engine_(mix(mix(mix(seed) ^ (rep + 0x632be59bd9b4e019ULL)) ^ purpose))
  {}

  /// Uniform on [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * unit(); }

  /// Standard normal by Box-Muller.
  double normal()
  {
    const double u1 = 1.0 - unit(); // (0, 1]
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  static std::uint64_t mix(std::uint64_t z)
  {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 engine_;
};

namespace detail {

// Index directions of example 4, in the order the recursion reads its lags
// (T_{i+5}, ..., T_i).
inline Matrix ex4_directions()
{
  Matrix theta(6, 3);
  theta.col(0) << 1, 0, 0, 2, 0, 0;
  theta.col(1) << 0, 0, 1, 0, 0, 2;
  theta.col(2) << -2, 2, -2, 1, -1, 1;
  theta.col(0) /= std::sqrt(5.0);
  theta.col(1) /= std::sqrt(5.0);
  theta.col(2) /= std::sqrt(15.0);
  return theta;
}

inline double ex4_link(const Vector& lags)
{
  const Vector u = ex4_directions().transpose() * lags;
  return -1.0 + 0.6 * u(0) - std::cos(0.5 * std::numbers::pi * u(1)) + std::exp(-u(2) * u(2));
}

} // namespace detail

/// Index directions (orthonormal columns) in the coordinates of the generated
/// design. For example 4 the design row is (T_i, ..., T_{i+5}) while the
/// recursion reads (T_{i+5}, ..., T_i), so the stated directions are reversed.
inline Matrix index_directions(const SimSpec& spec)
{
  switch (spec.example) {
    case Example::ex1: {
      Matrix t = Matrix::Zero(5, 1);
      t(0, 0) = 1.0 / std::sqrt(5.0);
      t(1, 0) = 2.0 / std::sqrt(5.0);
      return t;
    }
    case Example::ex2: {
      Matrix t = Matrix::Zero(spec.d, 2);
      t(0, 0) = 1.0;
      t(1, 1) = 1.0;
      return t;
    }
    case Example::ex3: {
      Matrix t = Matrix::Zero(5, 3);
      t(0, 0) = t(1, 1) = t(2, 2) = 1.0;
      return t;
    }
    case Example::ex4:
      return detail::ex4_directions().colwise().reverse();
  }
  return {};
}

inline Matrix true_projector(const SimSpec& spec)
{
  const Matrix t = index_directions(spec);
  return t * (t.transpose() * t).inverse() * t.transpose();
}

/// Noise-free regression function f evaluated at a design row.
inline double regression_function(const SimSpec& spec, const Vector& x)
{
  switch (spec.example) {
    case Example::ex1: {
      const double t = (x(0) + 2.0 * x(1)) / std::sqrt(5.0);
      const double s = std::sin(std::numbers::pi * t);
      return 4.0 * std::sqrt(std::abs(t)) * s * s;
    }
    case Example::ex2: {
      const double a = x(0), b = x(1);
      return (a - b * b * b) * (a * a * a + b);
    }
    case Example::ex3:
      return (1.0 + x(0)) * (1.0 + x(1)) * (1.0 + x(2));
    case Example::ex4:
      return detail::ex4_link(x.reverse());
  }
  return 0.0;
}

struct SimSample
{
  Dataset data;
  Matrix projector;
};

inline SimSample generate(const SimSpec& spec, std::size_t rep)
{
  spec.validate();
  StreamRng design(spec.seed, rep, StreamRng::design);
  StreamRng noise(spec.seed, rep, StreamRng::noise);
  const Eigen::Index n = spec.n;
  const Eigen::Index d = spec.d;

  SimSample out;
  out.data.X.resize(n, d);
  out.data.Y.resize(n);
  out.projector = true_projector(spec);

  if (spec.example == Example::ex4) {
    std::vector<double> T(static_cast<std::size_t>(n + 6));
    for (std::size_t t = 0; t < 6; ++t)
      T[t] = design.normal();
    Vector lags(6);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto base = static_cast<std::size_t>(i);
      for (Eigen::Index r = 0; r < 6; ++r)
        lags(r) = T[base + 5 - static_cast<std::size_t>(r)];
      T[base + 6] = detail::ex4_link(lags) + spec.sigma * noise.normal();
      for (Eigen::Index r = 0; r < 6; ++r)
        out.data.X(i, r) = T[base + static_cast<std::size_t>(r)];
      out.data.Y(i) = T[base + 6];
    }
    return out;
  }

  double lo = -1.0, hi = 1.0;
  if (spec.example == Example::ex2)
    lo = -40.0, hi = 40.0;
  else if (spec.example == Example::ex3)
    lo = 0.0, hi = 20.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      out.data.X(i, j) = design.uniform(lo, hi);
  for (Eigen::Index i = 0; i < n; ++i)
    out.data.Y(i) = regression_function(spec, out.data.X.row(i).transpose()) + spec.sigma * noise.normal();
  return out;
}

struct SimSummary
{
  std::vector<double> loss_first; // spectral loss after the first iteration
  std::vector<double> loss_final; // spectral loss of the final projector
  double mean_loss_first = 0.0;
  double mean_loss_final = 0.0;
  double std_first = 0.0; // divisor N
  double std_final = 0.0;
  double runtime = 0.0;   // seconds, wall clock
};

inline void summarize(SimSummary& s)
{
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    const double N = static_cast<double>(v.size());
    mean = 0.0;
    for (double x : v)
      mean += x;
    mean /= N;
    double ss = 0.0;
    for (double x : v)
      ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / N);
  };
  stats(s.loss_first, s.mean_loss_first, s.std_first);
  stats(s.loss_final, s.mean_loss_final, s.std_final);
}

/// Runs `spec.reps` independent replications on `threads` workers. Results
/// are stored by replication index, so they do not depend on the thread count.
inline SimSummary run_campaign(const SimSpec& spec, const SammOptions& opt = {}, unsigned threads = 1)
{
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t reps = spec.reps;
  SimSummary out;
  out.loss_first.assign(reps, 0.0);
  out.loss_final.assign(reps, 0.0);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        const SimSample sample = generate(spec, r);
        const EstimateResult res = estimate(sample.data, spec.m_star(), opt, sample.projector);
        const double first = res.iterations.front().loss->spectral;
        const double final = res.iterations.back().loss->spectral;
        if (!std::isfinite(first) || !std::isfinite(final))
          throw NumericError("non-finite loss");
        out.loss_first[r] = first;
        out.loss_final[r] = final;
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < count; ++t)
      pool.emplace_back(worker);
    worker();
  }

  for (std::size_t r = 0; r < reps; ++r) {
    if (!errors[r])
      continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const std::exception& e) {
      throw Error("replication " + std::to_string(r) + " failed: " + e.what());
    }
  }

  summarize(out);
  out.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

} // namespace samm
