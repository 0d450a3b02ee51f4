#pragma once

// Structural adaptation driver: alternate anisotropic local-linear gradient
// estimation with max-min structure extraction while the neighbourhoods are
// stretched along the estimated complement (rho shrinks) and widened (h grows).

#include "samm/basis.hpp"
#include "samm/error.hpp"
#include "samm/kernels.hpp"
#include "samm/linalg.hpp"
#include "samm/locallinear.hpp"
#include "samm/pimax.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace samm {

struct Schedule
{
  std::optional<double> h1; // resolved from the data when empty
  double rho1 = 1.0;
  double a_h = 1.0;
  double a_rho = 1.0;
  double h_max = 1.0;
  double rho_min = 1.0;
  Eigen::Index m_star = 1;
  Eigen::Index d = 1;

  struct Step
  {
    double h;
    double rho;
  };

  void validate() const
  {
    if (!(a_h > 1.0))
      throw InvalidInput("schedule: a_h must exceed 1");
    if (!(a_rho > 0.0 && a_rho < 1.0))
      throw InvalidInput("schedule: a_rho must lie in (0, 1)");
    if (!(rho1 > 0.0 && rho1 <= 1.0))
      throw InvalidInput("schedule: rho1 must lie in (0, 1]");
    if (!(h_max > 0.0) || !(rho_min > 0.0))
      throw InvalidInput("schedule: h_max and rho_min must be positive");
    if (h1 && !(*h1 > 0.0 && std::isfinite(*h1)))
      throw InvalidInput("schedule: h1 must be positive and finite");
    if (m_star < 1 || m_star >= d)
      throw InvalidInput("schedule: need 1 <= m_star < d");
  }

  /// (h_k, rho_k) for k = 1..k(n): step k+1 is taken unless
  /// rho_{k+1} < rho_min or h_{k+1} > h_max.
  std::vector<Step> steps() const
  {
    if (!h1)
      throw InvalidInput("schedule: h1 has not been resolved");
    validate();
    std::vector<Step> out;
    double h = *h1;
    double rho = rho1;
    while (true) {
      out.push_back({h, rho});
      rho *= a_rho;
      h *= a_h;
      if (rho < rho_min || h > h_max || out.size() >= 100000)
        break;
    }
    return out;
  }

  std::size_t iteration_count() const { return steps().size(); }
};

/// Default parameter law:
///   rho_min = n^(-1/(3 v m*)),  a_rho = exp(-1/(2 (3 v m*))),
///   h_max = 2 sqrt(d),          a_h = exp(1/(2 (4 v d))),  rho1 = 1.
inline Schedule default_schedule(Eigen::Index n,
                                 Eigen::Index d,
                                 Eigen::Index m_star,
                                 std::optional<double> h1_override = std::nullopt)
{
  if (d < 2 || n < d + 2)
    throw InvalidInput("default_schedule: need d >= 2 and n >= d + 2");
  if (m_star < 1 || m_star >= d)
    throw InvalidInput("default_schedule: need 1 <= m_star < d");
  const double mm = static_cast<double>(std::max<Eigen::Index>(3, m_star));
  const double dd = static_cast<double>(std::max<Eigen::Index>(4, d));
  Schedule s;
  s.h1 = h1_override;
  s.rho1 = 1.0;
  s.rho_min = std::pow(static_cast<double>(n), -1.0 / mm);
  s.a_rho = std::exp(-1.0 / (2.0 * mm));
  s.h_max = 2.0 * std::sqrt(static_cast<double>(d));
  s.a_h = std::exp(1.0 / (2.0 * dd));
  s.m_star = m_star;
  s.d = d;
  s.validate();
  return s;
}

/// C0 * n^(-1/(4 v d)), the bandwidth law used by the asymptotic analysis.
inline double theoretical_h1(Eigen::Index n, Eigen::Index d, double c0)
{
  const double dd = static_cast<double>(std::max<Eigen::Index>(4, d));
  return c0 * std::pow(static_cast<double>(n), -1.0 / dd);
}

struct Standardized
{
  Dataset data;
  Vector scales;  // per-column standard deviations (divisor n)
  double y_scale; // response standard deviation (divisor n)
};

/// Divides every predictor column and the response by its empirical
/// standard deviation. No centring.
inline Standardized standardize(const Dataset& data)
{
  data.validate();
  const double n = static_cast<double>(data.n());
  auto sd = [n](const Vector& v) {
    const double mean = v.sum() / n;
    return std::sqrt((v.array() - mean).square().sum() / n);
  };
  Standardized out;
  out.scales.resize(data.d());
  for (Eigen::Index j = 0; j < data.d(); ++j) {
    out.scales(j) = sd(data.X.col(j));
    if (!(out.scales(j) > 0.0))
      throw InvalidInput("standardize: predictor column " + std::to_string(j) + " has zero variance");
  }
  out.y_scale = sd(data.Y);
  if (!(out.y_scale > 0.0))
    throw InvalidInput("standardize: response has zero variance");
  out.data.X = data.X * out.scales.cwiseInverse().asDiagonal();
  out.data.Y = data.Y / out.y_scale;
  return out;
}

struct LossReport
{
  double spectral = 0.0;
  double frobenius = 0.0;
  double trace_residual = 0.0; // tr((I - est) * truth)
};

inline LossReport loss_metrics(const Matrix& pi_est, const Matrix& pi_true)
{
  if (pi_est.rows() != pi_true.rows() || pi_est.cols() != pi_true.cols() ||
      pi_true.rows() != pi_true.cols())
    throw InvalidInput("loss_metrics: dimension mismatch");
  if ((pi_true * pi_true - pi_true).cwiseAbs().maxCoeff() > 1e-8)
    throw InvalidInput("loss_metrics: reference matrix is not a projector");
  const Matrix diff = pi_est - pi_true;
  const Eigen::Index d = pi_true.rows();
  return {spectral_norm(diff), diff.norm(),
          ((Matrix::Identity(d, d) - pi_est) * pi_true).trace()};
}

struct SammOptions
{
  KernelFamily kernel = KernelFamily::linear_decay;
  std::optional<double> ridge;            // default 1/n
  MaxMinOptions solver;
  std::optional<std::size_t> max_freq;    // basis cap; full family when empty
  std::optional<double> h1;               // data-driven when empty
};

struct IterationRecord
{
  std::size_t k = 0;
  double h = 0.0;
  double rho = 0.0;
  SolverReport report;
  std::optional<LossReport> loss; // truncated estimate vs ground truth, original coordinates
};

struct EstimateResult
{
  Matrix pi_hat;                    // rank-m* projector, original coordinates
  CappedSpectral pi_relaxed_final;  // last max-min solution, original coordinates
  Matrix basis_vectors;             // d x m*, orthonormal, spans pi_hat
  std::vector<IterationRecord> iterations;
  Schedule schedule;                // with h1 resolved
  Vector scales;
  double y_scale = 1.0;
};

/// Runs the iteration with an explicit schedule and basis. Intermediate steps
/// work in standardized coordinates; the final step maps the betas back by
/// diag(scales)^-1 before extraction.
inline EstimateResult run_samm(const Dataset& data,
                               Eigen::Index m_star,
                               Schedule schedule,
                               const BasisMatrix& psi,
                               const SammOptions& opt = {},
                               const std::optional<Matrix>& ground_truth = std::nullopt)
{
  data.validate();
  const Eigen::Index d = data.d();
  if (m_star < 1 || m_star >= d)
    throw InvalidInput("run_samm: need 1 <= m_star < d");
  if (schedule.d != d || schedule.m_star != m_star)
    throw InvalidInput("run_samm: schedule was built for a different (d, m_star)");
  if (psi.n() != data.n())
    throw InvalidInput("run_samm: basis was built for a different sample size");
  if (ground_truth && (ground_truth->rows() != d || ground_truth->cols() != d))
    throw InvalidInput("run_samm: ground truth has the wrong dimension");

  const Standardized std_data = standardize(data);
  if (!schedule.h1)
    schedule.h1 = data_driven_h1(std_data.data.X);
  const auto steps = schedule.steps();
  const double ridge = opt.ridge.value_or(1.0 / static_cast<double>(data.n()));
  const Matrix unscale = std_data.scales.cwiseInverse().asDiagonal();

  EstimateResult out;
  out.scales = std_data.scales;
  out.y_scale = std_data.y_scale;

  Matrix pi = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const bool last = k + 1 == steps.size();
    const MetricShape shape{pi, steps[k].rho, steps[k].h};
    const GradientField grad = local_linear_fit(std_data.data, shape, ridge, opt.kernel);
    const BetaMatrix betas = compute_betas(grad, psi);
    const BetaMatrix original{unscale * betas.betas};

    IterationRecord rec;
    rec.k = k + 1;
    rec.h = steps[k].h;
    rec.rho = steps[k].rho;
    if (last) {
      const ProjectorEstimate est = solve_maxmin(original, m_star, opt.solver);
      rec.report = est.report;
      out.pi_relaxed_final = est.pi_relaxed;
      out.pi_hat = est.pi_projector;
      if (ground_truth)
        rec.loss = loss_metrics(est.pi_projector, *ground_truth);
    } else {
      const ProjectorEstimate est = solve_maxmin(betas, m_star, opt.solver);
      rec.report = est.report;
      pi = est.pi_relaxed.mat();
      if (ground_truth)
        rec.loss = loss_metrics(solve_maxmin(original, m_star, opt.solver).pi_projector, *ground_truth);
    }
    out.iterations.push_back(std::move(rec));
  }
  out.basis_vectors = out.pi_relaxed_final.eigvecs().leftCols(m_star);
  out.schedule = std::move(schedule);
  return out;
}

/// Betas of the isotropic first step (pi = 0, rho = 1, h = h1) mapped back to
/// original coordinates. Input to the dimension scan when m* is unknown.
inline BetaMatrix first_step_betas(const Dataset& data, const SammOptions& opt = {})
{
  data.validate();
  const Standardized std_data = standardize(data);
  const double h1 = opt.h1 ? *opt.h1 : data_driven_h1(std_data.data.X);
  const double ridge = opt.ridge.value_or(1.0 / static_cast<double>(data.n()));
  const BasisMatrix psi = build_basis(data.X, opt.max_freq);
  const GradientField grad = local_linear_fit(std_data.data, MetricShape::isotropic(data.d(), h1), ridge, opt.kernel);
  const BetaMatrix betas = compute_betas(grad, psi);
  return BetaMatrix{std_data.scales.cwiseInverse().asDiagonal() * betas.betas};
}

/// Convenience entry point: default schedule, full (or capped) basis.
inline EstimateResult estimate(const Dataset& data,
                               Eigen::Index m_star,
                               const SammOptions& opt = {},
                               const std::optional<Matrix>& ground_truth = std::nullopt)
{
  data.validate();
  const Schedule schedule = default_schedule(data.n(), data.d(), m_star, opt.h1);
  const BasisMatrix psi = build_basis(data.X, opt.max_freq);
  return run_samm(data, m_star, schedule, psi, opt, ground_truth);
}

} // namespace samm
