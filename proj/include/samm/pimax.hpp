#pragma once

// Structural extraction: the relaxed projector set
//   A_m = { P symmetric, 0 <= P <= I, tr P <= m },
// Euclidean projection onto it, and the max-min problem
//   minimize over P in A_m   max_l  b_l^T (I - P) b_l
// with a closed-form dual certificate.

#include "samm/error.hpp"
#include "samm/linalg.hpp"
#include "samm/locallinear.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace samm {

/// A symmetric matrix together with its (conventionally ordered)
/// eigendecomposition.
class CappedSpectral
{
public:
  CappedSpectral() = default;

  explicit CappedSpectral(Matrix mat)
  {
    if (!is_symmetric(mat))
      throw InvalidInput("CappedSpectral: matrix is not symmetric");
    mat_ = 0.5 * (mat + mat.transpose());
    auto eig = eigen_descending(mat_);
    eigvals_ = std::move(eig.values);
    eigvecs_ = std::move(eig.vectors);
  }

  static CappedSpectral from_spectrum(const Vector& values, const Matrix& vectors)
  {
    CappedSpectral out;
    out.mat_ = vectors * values.asDiagonal() * vectors.transpose();
    out.mat_ = 0.5 * (out.mat_ + out.mat_.transpose());
    auto eig = eigen_descending(out.mat_);
    out.eigvals_ = std::move(eig.values);
    out.eigvecs_ = std::move(eig.vectors);
    return out;
  }

  const Matrix& mat() const { return mat_; }
  const Vector& eigvals() const { return eigvals_; }
  const Matrix& eigvecs() const { return eigvecs_; }
  Eigen::Index dim() const { return mat_.rows(); }

  bool in_capped_set(double m, double eig_tol = 1e-10, double trace_tol = 1e-8) const
  {
    if (eigvals_.size() == 0)
      return true;
    return eigvals_.minCoeff() >= -eig_tol && eigvals_.maxCoeff() <= 1.0 + eig_tol &&
           eigvals_.sum() <= m + trace_tol;
  }

private:
  Matrix mat_;
  Vector eigvals_;
  Matrix eigvecs_;
};

/// Euclidean projection of v onto { x : 0 <= x_i <= 1, sum x_i <= m }.
/// The solution is x_i = clip(v_i - lambda, 0, 1) with lambda >= 0 found by
/// bisection, then refined in closed form on the free coordinates.
inline Vector project_capped_simplex(const Vector& v, double m)
{
  if (!(m >= 0.0))
    throw InvalidInput("project_capped_simplex: m must be non-negative");
  if (!v.allFinite())
    throw InvalidInput("project_capped_simplex: non-finite input");
  auto clipped = [&](double lambda) { return (v.array() - lambda).min(1.0).max(0.0).matrix(); };

  Vector x = clipped(0.0);
  if (x.sum() <= m)
    return x;

  // sum(clip(v - lambda)) is non-increasing in lambda and 0 at lambda = max v.
  double lo = 0.0;
  double hi = std::max(v.maxCoeff(), 0.0);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (clipped(mid).sum() > m)
      lo = mid;
    else
      hi = mid;
  }
  double lambda = 0.5 * (lo + hi);

  // Exact shift for the free set identified by the bisection.
  double free_sum = 0.0;
  double upper = 0.0;
  int free_count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double s = v(i) - lambda;
    if (s >= 1.0)
      upper += 1.0;
    else if (s > 0.0) {
      free_sum += v(i);
      ++free_count;
    }
  }
  if (free_count > 0) {
    const double exact = (free_sum + upper - m) / free_count;
    if (exact >= 0.0) {
      const Vector candidate = clipped(exact);
      if (std::abs(candidate.sum() - m) <= std::abs(clipped(lambda).sum() - m))
        lambda = exact;
    }
  }
  return clipped(lambda);
}

/// Frobenius projection of a symmetric matrix onto A_m.
inline CappedSpectral project_to_capped_set(const Matrix& M, double m)
{
  if (!is_symmetric(M))
    throw InvalidInput("project_to_capped_set: matrix is not symmetric");
  const auto eig = eigen_descending(0.5 * (M + M.transpose()));
  const Vector capped = project_capped_simplex(eig.values, m);
  return CappedSpectral::from_spectrum(capped, eig.vectors);
}

/// Orthogonal projector onto the m leading eigenvectors (deterministic sign
/// and tie conventions of `eigen_descending`).
inline Matrix truncate_to_projector(const CappedSpectral& pi, Eigen::Index m)
{
  if (m < 1 || m > pi.dim())
    throw InvalidInput("truncate_to_projector: need 1 <= m <= d");
  const Matrix basis = pi.eigvecs().leftCols(m);
  return projector_from_basis(basis);
}

inline Matrix truncate_to_projector(const Matrix& pi, Eigen::Index m)
{
  return truncate_to_projector(CappedSpectral(pi), m);
}

struct SolverReport
{
  double objective = 0.0;  // max_l b_l^T (I - P) b_l at the returned P
  double dual_bound = 0.0; // D(lambda) for the returned simplex weights
  double gap = 0.0;        // objective - dual_bound
  std::size_t iterations = 0;
  bool certified = false;
  std::vector<std::size_t> active_set; // columns within tolerance of the max
  Vector weights;                      // simplex weights lambda, one per column
};

struct ProjectorEstimate
{
  CappedSpectral pi_relaxed;
  Matrix pi_projector;
  SolverReport report;
};

enum class MaxMinMethod
{
  barrier,             // log-barrier path following with a working set
  smoothed_subgradient // projected subgradient on a softmax-smoothed max
};

struct MaxMinOptions
{
  double tol = 1e-6;
  std::size_t max_iter = 5000;
  MaxMinMethod method = MaxMinMethod::barrier;
};

/// q_l(P) = |b_l|^2 - b_l^T P b_l for every column.
inline Vector maxmin_residuals(const Matrix& betas, const Matrix& pi)
{
  const Matrix pb = pi * betas;
  return betas.colwise().squaredNorm().transpose() -
         betas.cwiseProduct(pb).colwise().sum().transpose();
}

/// D(lambda) = sum_l lambda_l |b_l|^2 - (sum of the m largest positive
/// eigenvalues of sum_l lambda_l b_l b_l^T). A lower bound on the max-min
/// optimum for every lambda in the simplex.
inline double maxmin_dual_bound(const Matrix& betas, const Vector& lambda, Eigen::Index m)
{
  if (lambda.size() != betas.cols())
    throw InvalidInput("maxmin_dual_bound: weight count does not match the column count");
  const Matrix weighted = betas * lambda.cwiseSqrt().asDiagonal();
  const Matrix M = weighted * weighted.transpose();
  const double linear = betas.colwise().squaredNorm().dot(lambda);
  return linear - top_positive_eigen_sum(M, m);
}

namespace detail {

inline void validate_betas(const Matrix& betas, Eigen::Index m, const char* who)
{
  const Eigen::Index d = betas.rows();
  if (d < 2)
    throw InvalidInput(std::string(who) + ": need d >= 2");
  if (m < 1 || m >= d)
    throw InvalidInput(std::string(who) + ": need 1 <= m < d (m = " + std::to_string(m) +
                       ", d = " + std::to_string(d) + ")");
  if (betas.cols() < 1 || !betas.allFinite())
    throw InvalidInput(std::string(who) + ": betas must be finite and non-empty");
  if (betas.colwise().squaredNorm().maxCoeff() <= 0.0)
    throw InvalidInput(std::string(who) + ": all beta columns are zero");
}

inline std::vector<std::size_t> active_columns(const Vector& residuals, double objective, double slack)
{
  std::vector<std::size_t> out;
  for (Eigen::Index l = 0; l < residuals.size(); ++l)
    if (residuals(l) >= objective - slack)
      out.push_back(static_cast<std::size_t>(l));
  return out;
}

// Symmetric basis for the packed parameterization of P: element k is either
// e_a e_a^T or e_a e_b^T + e_b e_a^T (a < b).
struct SymIndex
{
  std::vector<Eigen::Index> a, b;

  explicit SymIndex(Eigen::Index d)
  {
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i; j < d; ++j) {
        a.push_back(i);
        b.push_back(j);
      }
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(a.size()); }

  // <E_k, S> for symmetric S.
  double inner(Eigen::Index k, const Matrix& S) const
  {
    const auto i = a[static_cast<std::size_t>(k)];
    const auto j = b[static_cast<std::size_t>(k)];
    return i == j ? S(i, i) : 2.0 * S(i, j);
  }

  // tr(S E_k S E_l) for symmetric S.
  double quad(Eigen::Index k, Eigen::Index l, const Matrix& S) const
  {
    const auto p = a[static_cast<std::size_t>(k)], q = b[static_cast<std::size_t>(k)];
    const auto r = a[static_cast<std::size_t>(l)], s = b[static_cast<std::size_t>(l)];
    // tr(S e_x e_y^T S e_u e_v^T) = S(y,u) S(v,x)
    auto term = [&](Eigen::Index x, Eigen::Index y, Eigen::Index u, Eigen::Index v) {
      return S(y, u) * S(v, x);
    };
    double out = term(p, q, r, s);
    if (r != s)
      out += term(p, q, s, r);
    if (p != q) {
      out += term(q, p, r, s);
      if (r != s)
        out += term(q, p, s, r);
    }
    return out;
  }

  Matrix unpack(const Vector& x, Eigen::Index d) const
  {
    Matrix P(d, d);
    for (Eigen::Index k = 0; k < size(); ++k) {
      P(a[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(k)]) = x(k);
      P(b[static_cast<std::size_t>(k)], a[static_cast<std::size_t>(k)]) = x(k);
    }
    return P;
  }
};

// Allowed gap in units of `scale` for a relative tolerance on the
// unscaled objective: tol * (1 + scale * primal) / scale.
inline double tol_slack(double tol, double scale, double primal)
{
  return tol * (1.0 / scale + primal);
}

struct BarrierState
{
  Matrix pi;
  Vector lambda; // over the working columns
  double mu = 1.0;
  std::size_t newton_steps = 0;
};

// Log-barrier path following for
//   min t  s.t.  c_l - <P, b_l b_l^T> <= t (l in working set),  P in interior(A_m).
// Recentres with damped Newton steps; after each centring the closed-form
// certificate over the working columns is compared with half the relative
// tolerance (objective in units of `scale`).
inline BarrierState barrier_solve(const Matrix& B,
                                  Eigen::Index m,
                                  double tol,
                                  double scale,
                                  std::size_t budget,
                                  const Matrix* warm_pi = nullptr,
                                  double warm_mu = 1.0)
{
  const Eigen::Index d = B.rows();
  const Eigen::Index L = B.cols();
  const SymIndex sym(d);
  const Eigen::Index np = sym.size();
  const Eigen::Index p = np + 1;
  const double md = static_cast<double>(m);
  const Vector c = B.colwise().squaredNorm().transpose();

  // Constraint rows a_l = (<E_k, b_l b_l^T>, 1).
  Matrix A(L, p);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index k = 0; k < np; ++k) {
      const auto i = sym.a[static_cast<std::size_t>(k)];
      const auto j = sym.b[static_cast<std::size_t>(k)];
      A(l, k) = (i == j ? 1.0 : 2.0) * B(i, l) * B(j, l);
    }
    A(l, np) = 1.0;
  }
  Vector trace_dir = Vector::Zero(p);
  for (Eigen::Index k = 0; k < np; ++k)
    if (sym.a[static_cast<std::size_t>(k)] == sym.b[static_cast<std::size_t>(k)])
      trace_dir(k) = 1.0;

  // Centre of A_m: P = (m / 2d) I, or a point pulled from a previous
  // solution towards it.
  Vector x = Vector::Zero(p);
  for (Eigen::Index k = 0; k < np; ++k)
    if (sym.a[static_cast<std::size_t>(k)] == sym.b[static_cast<std::size_t>(k)])
      x(k) = md / (2.0 * static_cast<double>(d));
  if (warm_pi) {
    for (Eigen::Index k = 0; k < np; ++k)
      x(k) = 0.9 * (*warm_pi)(sym.a[static_cast<std::size_t>(k)], sym.b[static_cast<std::size_t>(k)]) +
             0.1 * x(k);
  }
  {
    const Vector s0 = A.leftCols(np) * x.head(np) - c;
    x(np) = 1.0 - s0.minCoeff();
  }

  struct Eval
  {
    bool feasible = false;
    double value = 0.0;
    Vector slack;
    Matrix pinv, qinv;
    double trace_slack = 0.0;
  };

  auto evaluate = [&](const Vector& xv, double mu) {
    Eval e;
    e.slack = A * xv - c;
    if (e.slack.minCoeff() <= 0.0)
      return e;
    const Matrix P = sym.unpack(xv.head(np), d);
    e.trace_slack = md - P.trace();
    if (e.trace_slack <= 0.0)
      return e;
    Eigen::LLT<Matrix> lp(P);
    if (lp.info() != Eigen::Success)
      return e;
    const Matrix IP = Matrix::Identity(d, d) - P;
    Eigen::LLT<Matrix> lq(IP);
    if (lq.info() != Eigen::Success)
      return e;
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double u = lp.matrixLLT()(i, i);
      const double w = lq.matrixLLT()(i, i);
      if (!(u > 0.0) || !(w > 0.0))
        return e;
      logdet += 2.0 * std::log(u) + 2.0 * std::log(w);
    }
    e.pinv = lp.solve(Matrix::Identity(d, d));
    e.qinv = lq.solve(Matrix::Identity(d, d));
    e.value = xv(np) / mu - e.slack.array().log().sum() - logdet - std::log(e.trace_slack);
    e.feasible = std::isfinite(e.value);
    return e;
  };

  BarrierState st;
  double mu = warm_pi ? std::min(1.0, warm_mu) : 1.0;
  std::size_t steps = 0;
  Eval cur = evaluate(x, mu);
  if (!cur.feasible)
    throw NumericError("maxmin barrier: infeasible starting point");

  // Positive when the certificate is not yet tight enough.
  auto certificate_excess = [&](const Eval& e, Vector& lambda) {
    lambda = e.slack.cwiseInverse();
    lambda /= lambda.sum();
    const Matrix P = sym.unpack(x.head(np), d);
    const double primal = maxmin_residuals(B, P).maxCoeff();
    const double dual = maxmin_dual_bound(B, lambda, m);
    return (primal - dual) - 0.5 * tol_slack(tol, scale, primal);
  };

  Vector lambda;
  while (true) {
    // Centre for the current mu.
    for (int inner = 0; inner < 100 && steps < budget; ++inner) {
      Vector grad(p);
      Matrix H(p, p);
      const Vector inv_s = cur.slack.cwiseInverse();
      const Matrix As = inv_s.asDiagonal() * A;
      grad = -As.transpose() * Vector::Ones(L);
      H.noalias() = As.transpose() * As;
      grad(np) += 1.0 / mu;
      for (Eigen::Index k = 0; k < np; ++k) {
        grad(k) += -sym.inner(k, cur.pinv) + sym.inner(k, cur.qinv) + trace_dir(k) / cur.trace_slack;
        for (Eigen::Index l = 0; l <= k; ++l) {
          const double h = sym.quad(k, l, cur.pinv) + sym.quad(k, l, cur.qinv) +
                           trace_dir(k) * trace_dir(l) / (cur.trace_slack * cur.trace_slack);
          H(k, l) += h;
          if (l != k)
            H(l, k) += h;
        }
      }
      Eigen::LDLT<Matrix> ldlt(H);
      const Vector step = -ldlt.solve(grad);
      const double decrement2 = -grad.dot(step);
      ++steps;
      if (!step.allFinite())
        break;
      if (decrement2 < 1e-12)
        break;
      // Armijo backtracking from the full Newton step.
      double alpha = 1.0;
      Eval next;
      for (int bt = 0; bt < 60; ++bt) {
        next = evaluate(x + alpha * step, mu);
        if (next.feasible &&
            next.value <= cur.value - 0.25 * alpha * decrement2 + 1e-13 * std::abs(cur.value))
          break;
        next.feasible = false;
        alpha *= 0.5;
      }
      if (!next.feasible)
        break;
      x += alpha * step;
      cur = std::move(next);
      if (decrement2 < 1e-6)
        break;
    }

    const double excess = certificate_excess(cur, lambda);
    if (excess <= 0.0 || steps >= budget || mu < 1e-16)
      break;
    mu *= 0.1;
    cur = evaluate(x, mu);
  }

  st.pi = sym.unpack(x.head(np), d);
  st.lambda = lambda;
  st.mu = mu;
  st.newton_steps = steps;
  return st;
}

inline ProjectorEstimate finish_estimate(const Matrix& betas,
                                         Eigen::Index m,
                                         const Matrix& pi,
                                         const Vector& lambda,
                                         std::size_t iterations,
                                         double tol)
{
  ProjectorEstimate out;
  out.pi_relaxed = CappedSpectral(0.5 * (pi + pi.transpose()));
  out.pi_projector = truncate_to_projector(out.pi_relaxed, m);
  auto& r = out.report;
  const Vector q = maxmin_residuals(betas, out.pi_relaxed.mat());
  r.objective = q.maxCoeff();
  r.dual_bound = maxmin_dual_bound(betas, lambda, m);
  r.gap = r.objective - r.dual_bound;
  r.iterations = iterations;
  r.certified = r.gap <= tol * (1.0 + r.objective);
  r.active_set = active_columns(q, r.objective, 10.0 * tol * (1.0 + r.objective));
  r.weights = lambda;
  return out;
}

inline ProjectorEstimate solve_maxmin_barrier(const Matrix& betas, Eigen::Index m, const MaxMinOptions& opt)
{
  const Eigen::Index d = betas.rows();
  const Eigen::Index L = betas.cols();
  const Vector c = betas.colwise().squaredNorm().transpose();
  const double scale = c.maxCoeff();
  const Matrix B = betas / std::sqrt(scale);

  // Working set: the largest columns first, violators added until the
  // certificate holds over all columns.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(L));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return c(a) > c(b); });
  const Eigen::Index np = d * (d + 1) / 2;
  const auto initial =
    static_cast<std::size_t>(std::min<Eigen::Index>(L, std::max<Eigen::Index>(3 * np, 16)));
  std::vector<Eigen::Index> working(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(initial));
  std::vector<char> in_set(static_cast<std::size_t>(L), 0);
  for (auto l : working)
    in_set[static_cast<std::size_t>(l)] = 1;
  const auto grow = static_cast<std::size_t>(std::max<Eigen::Index>(np, 8));

  std::size_t used = 0;
  Matrix pi;
  double warm_mu = 1.0;
  Vector lambda_full;
  while (true) {
    std::sort(working.begin(), working.end());
    Matrix Bw(d, static_cast<Eigen::Index>(working.size()));
    for (std::size_t k = 0; k < working.size(); ++k)
      Bw.col(static_cast<Eigen::Index>(k)) = B.col(working[k]);

    const auto st = barrier_solve(Bw, m, opt.tol, scale, opt.max_iter > used ? opt.max_iter - used : 1,
                                  pi.size() ? &pi : nullptr, warm_mu);
    used += st.newton_steps;
    warm_mu = st.mu * 1e3;
    pi = st.pi;
    lambda_full = Vector::Zero(L);
    for (std::size_t k = 0; k < working.size(); ++k)
      lambda_full(working[k]) = st.lambda(static_cast<Eigen::Index>(k));

    const Vector q = maxmin_residuals(B, pi);
    const double primal = q.maxCoeff();
    const double dual = maxmin_dual_bound(B, lambda_full, m);
    if (primal - dual <= tol_slack(opt.tol, scale, primal) || used >= opt.max_iter)
      break;

    double working_max = -std::numeric_limits<double>::infinity();
    for (auto l : working)
      working_max = std::max(working_max, q(l));
    std::vector<Eigen::Index> violators;
    for (Eigen::Index l = 0; l < L; ++l)
      if (!in_set[static_cast<std::size_t>(l)] && q(l) > working_max)
        violators.push_back(l);
    if (violators.empty())
      break;
    std::stable_sort(violators.begin(), violators.end(), [&](Eigen::Index a, Eigen::Index b) { return q(a) > q(b); });
    if (violators.size() > grow)
      violators.resize(grow);
    for (auto l : violators) {
      in_set[static_cast<std::size_t>(l)] = 1;
      working.push_back(l);
    }
  }
  return finish_estimate(betas, m, pi, lambda_full, used, opt.tol);
}

inline ProjectorEstimate solve_maxmin_subgradient(const Matrix& betas, Eigen::Index m, const MaxMinOptions& opt)
{
  const Eigen::Index L = betas.cols();
  const Vector c = betas.colwise().squaredNorm().transpose();
  const double scale = c.maxCoeff();
  const Matrix B = betas / std::sqrt(scale);
  const double md = static_cast<double>(m);

  // Warm start from the normalized PCA matrix.
  const Matrix gram = B * B.transpose();
  Matrix pi = project_to_capped_set(gram / std::max(spectral_norm(gram), 1e-300), md).mat();
  Matrix avg = pi;
  Vector lambda_avg = Vector::Zero(L);
  Matrix best = pi;
  Vector best_lambda = Vector::Constant(L, 1.0 / static_cast<double>(L));
  double best_primal = maxmin_residuals(B, pi).maxCoeff();
  double best_dual = maxmin_dual_bound(B, best_lambda, m);

  const double tau0 = 1.0; // objective scale after normalization
  const double step0 = 1.0;
  std::size_t it = 0;
  while (it < opt.max_iter) {
    ++it;
    const double root = std::sqrt(static_cast<double>(it));
    const Vector q = maxmin_residuals(B, pi);
    const double tau = tau0 / root;
    Vector w = ((q.array() - q.maxCoeff()) / tau).exp().matrix();
    w /= w.sum();
    const Matrix G = B * w.asDiagonal() * B.transpose();
    pi = project_to_capped_set(pi + (step0 / root) * G, md).mat();

    const double inv = 1.0 / static_cast<double>(it);
    avg += (pi - avg) * inv;
    lambda_avg += (w - lambda_avg) * inv;

    if (it % 25 == 0 || it == opt.max_iter) {
      const double dual = maxmin_dual_bound(B, lambda_avg, m);
      if (dual > best_dual) {
        best_dual = dual;
        best_lambda = lambda_avg;
      }
      for (const Matrix* cand : {&avg, &pi}) {
        const double primal = maxmin_residuals(B, *cand).maxCoeff();
        if (primal < best_primal) {
          best_primal = primal;
          best = *cand;
        }
      }
      if (best_primal - best_dual <= tol_slack(opt.tol, scale, best_primal))
        break;
    }
  }
  return finish_estimate(betas, m, best, best_lambda, it, opt.tol);
}

} // namespace detail

/// Minimizes max_l b_l^T (I - P) b_l over P in A_m. A run that exhausts
/// `max_iter` returns its best iterate with `certified == false`.
inline ProjectorEstimate solve_maxmin(const BetaMatrix& betas, Eigen::Index m, const MaxMinOptions& opt = {})
{
  detail::validate_betas(betas.betas, m, "solve_maxmin");
  if (!(opt.tol > 0.0))
    throw InvalidInput("solve_maxmin: tol must be positive");
  if (opt.max_iter == 0)
    throw InvalidInput("solve_maxmin: max_iter must be positive");
  switch (opt.method) {
    case MaxMinMethod::smoothed_subgradient:
      return detail::solve_maxmin_subgradient(betas.betas, m, opt);
    case MaxMinMethod::barrier:
      break;
  }
  return detail::solve_maxmin_barrier(betas.betas, m, opt);
}

/// Principal-component extraction: top-m eigenprojector of sum_l b_l b_l^T,
/// minimizing sum_l b_l^T (I - P) b_l over rank-m projectors.
inline ProjectorEstimate solve_pca(const BetaMatrix& betas, Eigen::Index m)
{
  detail::validate_betas(betas.betas, m, "solve_pca");
  const Matrix& B = betas.betas;
  const Matrix gram = B * B.transpose();
  const CappedSpectral spectral(gram);
  ProjectorEstimate out;
  out.pi_projector = truncate_to_projector(spectral, m);
  out.pi_relaxed = CappedSpectral(out.pi_projector);
  auto& r = out.report;
  r.objective = maxmin_residuals(B, out.pi_projector).sum();
  r.dual_bound = r.objective;
  r.gap = 0.0;
  r.certified = true;
  return out;
}

struct DimensionScan
{
  Vector R;        // R(m) for m = 1..d, stored at index m - 1
  double R0 = 0.0; // max_l |b_l|, the residual with no projection
  Eigen::Index m_hat = 1;
  std::vector<SolverReport> reports; // one per m = 1..d-1
};

/// R(m) = sqrt(max-min optimum) for m = 1..d-1 and R(d) = 0, repaired to be
/// non-increasing. Beyond the structural dimension R only decays slowly at
/// the noise level, so m_hat is the last m < d where R drops sharply:
/// R(m) < drop_ratio * R(m-1), with R(0) = R0. The search stops once R(m-1)
/// is at or below the solver resolution, since ratios there are noise.
inline DimensionScan dimension_scan(const BetaMatrix& betas,
                                    double tol = 1e-6,
                                    double drop_ratio = 0.35,
                                    const MaxMinOptions& base = {})
{
  const Eigen::Index d = betas.dim();
  detail::validate_betas(betas.betas, 1, "dimension_scan");
  if (!(drop_ratio > 0.0 && drop_ratio < 1.0))
    throw InvalidInput("dimension_scan: drop_ratio must lie in (0, 1)");
  MaxMinOptions opt = base;
  opt.tol = tol;

  DimensionScan out;
  out.R = Vector::Zero(d);
  for (Eigen::Index m = 1; m < d; ++m) {
    const auto est = solve_maxmin(betas, m, opt);
    out.R(m - 1) = std::sqrt(std::max(est.report.objective, 0.0));
    out.reports.push_back(est.report);
  }
  for (Eigen::Index m = 1; m < d; ++m)
    out.R(m) = std::min(out.R(m), out.R(m - 1));

  const double cmax = betas.betas.colwise().squaredNorm().maxCoeff();
  out.R0 = std::sqrt(cmax);
  const double resolution = std::sqrt(2.0 * tol * (1.0 + cmax));
  out.m_hat = 1;
  for (Eigen::Index m = 1; m < d; ++m) {
    const double prev = m == 1 ? out.R0 : out.R(m - 2);
    if (prev <= resolution)
      break;
    if (out.R(m - 1) < drop_ratio * prev)
      out.m_hat = m;
  }
  return out;
}

} // namespace samm
