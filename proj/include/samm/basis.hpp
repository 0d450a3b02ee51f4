#pragma once

#include "samm/error.hpp"
#include "samm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

namespace samm {

/// Sort order of one predictor column. Indices are 0-based: `order[r]` is the
/// observation holding rank r (ascending, ties by index), `rank[i]` its inverse.
struct RankPermutation
{
  std::vector<std::size_t> order;
  std::vector<std::size_t> rank;
};

inline std::vector<RankPermutation> rank_permutations(const Matrix& X)
{
  if (!X.allFinite())
    throw InvalidInput("rank_permutations: X has non-finite entries");
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<RankPermutation> out(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    auto& perm = out[static_cast<std::size_t>(j)];
    perm.order.resize(n);
    std::iota(perm.order.begin(), perm.order.end(), std::size_t{0});
    std::stable_sort(perm.order.begin(), perm.order.end(), [&](std::size_t a, std::size_t b) {
      return X(static_cast<Eigen::Index>(a), j) < X(static_cast<Eigen::Index>(b), j);
    });
    perm.rank.resize(n);
    for (std::size_t r = 0; r < n; ++r)
      perm.rank[perm.order[r]] = r;
  }
  return out;
}

enum class Phase
{
  cosine,
  sine,
};

struct BasisColumn
{
  std::size_t coordinate; // 0-based predictor index
  std::size_t frequency;  // k >= 1
  Phase phase;
};

/// Fourier vectors evaluated on coordinate-wise ranks, each column rescaled
/// to sum of squares n.
struct BasisMatrix
{
  Matrix psi; // n x L
  std::vector<BasisColumn> meta;

  Eigen::Index n() const { return psi.rows(); }
  Eigen::Index size() const { return psi.cols(); }
};

/// Largest entry magnitude of any normalized basis column.
inline constexpr double kBasisBound = std::numbers::sqrt2;

/// For each coordinate j and k = 1..K (K = floor(n/2) unless `max_freq` caps
/// it) emits cos(2 pi (k-1) r_j(i) / n) and sin(2 pi k r_j(i) / n), where r_j(i)
/// is the 1-based rank of observation i in column j. Vanishing columns are
/// dropped and the constant column appears once.
inline BasisMatrix build_basis(const Matrix& X, std::optional<std::size_t> max_freq = std::nullopt)
{
  const Eigen::Index n = X.rows();
  if (n < 2)
    throw InvalidInput("build_basis: need at least two observations");
  if (max_freq && *max_freq == 0)
    throw InvalidInput("build_basis: max_freq must be positive");

  const auto perms = rank_permutations(X);
  const std::size_t half = static_cast<std::size_t>(n) / 2;
  const std::size_t kmax = max_freq ? std::min(*max_freq, half) : half;
  const double nn = static_cast<double>(n);
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<Vector> cols;
  BasisMatrix out;
  bool have_constant = false;
  Vector raw(n);

  auto emit = [&](const BasisColumn& meta) {
    const double ss = raw.squaredNorm();
    if (ss <= 1e-8 * nn)
      return;
    Vector col = raw * std::sqrt(nn / ss);
    if (col.cwiseAbs().maxCoeff() > kBasisBound + 1e-9)
      throw NumericError("build_basis: normalized column exceeds the sqrt(2) bound");
    cols.push_back(std::move(col));
    out.meta.push_back(meta);
  };

  for (std::size_t j = 0; j < perms.size(); ++j) {
    const auto& rank = perms[j].rank;
    for (std::size_t k = 1; k <= kmax; ++k) {
      if (k == 1) {
        if (!have_constant) {
          raw.setOnes();
          emit({j, k, Phase::cosine});
          have_constant = true;
        }
      } else {
        const double f = two_pi * static_cast<double>(k - 1) / nn;
        for (Eigen::Index i = 0; i < n; ++i)
          raw(i) = std::cos(f * static_cast<double>(rank[static_cast<std::size_t>(i)] + 1));
        emit({j, k, Phase::cosine});
      }
      const double f = two_pi * static_cast<double>(k) / nn;
      for (Eigen::Index i = 0; i < n; ++i)
        raw(i) = std::sin(f * static_cast<double>(rank[static_cast<std::size_t>(i)] + 1));
      emit({j, k, Phase::sine});
    }
  }

  out.psi.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    out.psi.col(static_cast<Eigen::Index>(c)) = cols[c];
  return out;
}

} // namespace samm
