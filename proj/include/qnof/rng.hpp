// Seeded sampling helpers shared by the benchmark and imaging harnesses.
#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "qnof/quat_matrix.hpp"

namespace qnof {

using Rng = std::mt19937_64;

/// n-by-r quaternion matrix with four independent N(0,1) components per
/// entry. Fill order is fixed (row-major, components w,x,y,z) so a seed
/// pins the sample exactly.
inline QuatMatrix random_normal_quat(Eigen::Index rows, Eigen::Index cols,
                                     Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  QuatMatrix q(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      q.w(i, j) = gauss(rng);
      q.x(i, j) = gauss(rng);
      q.y(i, j) = gauss(rng);
      q.z(i, j) = gauss(rng);
    }
  }
  return q;
}

/// First `count` elements of a seeded partial Fisher-Yates shuffle of
/// {0,...,total-1}; the remainder of the permutation follows.
inline std::vector<std::int64_t> sample_without_replacement(
    std::int64_t count, std::int64_t total, Rng& rng) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(total));
  std::iota(idx.begin(), idx.end(), 0);
  for (std::int64_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::int64_t> pick(i, total - 1);
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

}  // namespace qnof
