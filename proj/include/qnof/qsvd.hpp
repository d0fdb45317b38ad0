// Quaternion SVD via the complex adjoint representation.
//
// A quaternion matrix Q = C1 + C2 j maps to the 2m-by-2n complex matrix
//   chi(Q) = [ C1          C2        ]
//            [ -conj(C2)   conj(C1)  ]
// whose singular values are those of Q, each duplicated. A dense complex
// SVD of chi(Q) followed by a structure-respecting column extraction gives
// unitary quaternion factors U, V with A = U Sigma V*.
#pragma once

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <iterator>
#include <stdexcept>
#include <vector>

#include "qnof/quat_matrix.hpp"

namespace qnof {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct ComplexAdjoint {
  ComplexMatrix mat;  // 2m x 2n
};

inline ComplexAdjoint complex_adjoint(const QuatMatrix& q) {
  const Eigen::Index m = q.rows(), n = q.cols();
  const std::complex<double> im(0, 1);
  ComplexMatrix c1 =
      q.w.cast<std::complex<double>>() + im * q.x.cast<std::complex<double>>();
  ComplexMatrix c2 =
      q.y.cast<std::complex<double>>() + im * q.z.cast<std::complex<double>>();
  ComplexAdjoint adj;
  adj.mat.resize(2 * m, 2 * n);
  adj.mat.topLeftCorner(m, n) = c1;
  adj.mat.topRightCorner(m, n) = c2;
  adj.mat.bottomLeftCorner(m, n) = -c2.conjugate();
  adj.mat.bottomRightCorner(m, n) = c1.conjugate();
  return adj;
}

/// Inverse of complex_adjoint, reading the top block row.
inline QuatMatrix unadjoint(const ComplexMatrix& chi) {
  const Eigen::Index m = chi.rows() / 2, n = chi.cols() / 2;
  QuatMatrix q(m, n);
  q.w = chi.topLeftCorner(m, n).real();
  q.x = chi.topLeftCorner(m, n).imag();
  q.y = chi.topRightCorner(m, n).real();
  q.z = chi.topRightCorner(m, n).imag();
  return q;
}

struct QsvdFactors {
  QuatMatrix u;           // m x m unitary
  Eigen::VectorXd sigma;  // min(m,n), nonnegative, nonincreasing
  QuatMatrix v;           // n x n unitary
};

namespace detail {

// LAPACK complex SVD; zgesdd with zgesvd fallback on non-convergence.
inline void complex_svd(ComplexMatrix a, Eigen::VectorXd& s, ComplexMatrix* u,
                        ComplexMatrix* vh, char jobz) {
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  const bool vectors = jobz != 'N';
  s.resize(k);
  if (vectors) {
    u->resize(m, jobz == 'A' ? m : k);
    vh->resize(jobz == 'A' ? n : k, n);
  }
  auto* aptr = reinterpret_cast<lapack_complex_double*>(a.data());
  auto* uptr =
      vectors ? reinterpret_cast<lapack_complex_double*>(u->data()) : nullptr;
  auto* vptr =
      vectors ? reinterpret_cast<lapack_complex_double*>(vh->data()) : nullptr;
  lapack_int info =
      LAPACKE_zgesdd(LAPACK_COL_MAJOR, jobz, m, n, aptr, m, s.data(), uptr, m,
                     vptr, static_cast<lapack_int>(vectors ? vh->rows() : 1));
  if (info != 0) {
    std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(1, k)));
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, vectors ? 'S' : 'N',
                          vectors ? 'S' : 'N', m, n, aptr, m, s.data(), uptr, m,
                          vptr, static_cast<lapack_int>(vectors ? vh->rows() : 1),
                          superb.data());
    if (info != 0)
      throw std::runtime_error("complex_svd: SVD iteration failed to converge");
  }
}

// Adjoint singular values must occur in equal pairs; a wider split than
// 1e-8 relative indicates a failed sweep.
inline void check_pairing(const Eigen::VectorXd& s2, Eigen::Index k) {
  const double tol = 1e-8 * std::max(s2(0), 1e-300);
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(s2(2 * i) - s2(2 * i + 1)) > tol)
      throw std::runtime_error("qsvd: adjoint singular values failed to pair");
}

// Quaternionic structure map on C^{2m}: vec(x j) for [a; b] = vec(x).
inline ComplexVector j_map(const ComplexVector& v) {
  const Eigen::Index m = v.size() / 2;
  ComplexVector out(v.size());
  out.head(m) = v.tail(m).conjugate();
  out.tail(m) = -v.head(m).conjugate();
  return out;
}

// Removes the quaternionic span of each basis vector from w (two passes).
inline void j_orthogonalize(ComplexVector& w,
                            const std::vector<ComplexVector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& v : basis) {
      w -= v * v.dot(w);
      const ComplexVector jv = j_map(v);
      w -= jv * jv.dot(w);
    }
  }
}

// Greedily picks `count` quaternion-structured representatives from the
// columns of a J-invariant orthonormal set, largest residual first.
inline std::vector<ComplexVector> pick_representatives(
    const ComplexMatrix& cols, Eigen::Index count,
    const std::vector<ComplexVector>& preset) {
  std::vector<ComplexVector> chosen;
  chosen.reserve(static_cast<std::size_t>(count));
  while (std::ssize(chosen) < count) {
    double best_norm = 0.0;
    ComplexVector best;
    for (Eigen::Index c = 0; c < cols.cols(); ++c) {
      ComplexVector w = cols.col(c);
      j_orthogonalize(w, preset);
      j_orthogonalize(w, chosen);
      const double nrm = w.norm();
      if (nrm > best_norm) {
        best_norm = nrm;
        best = std::move(w);
      }
    }
    if (best_norm < 1e-6)
      throw std::runtime_error("qsvd: structured column extraction failed");
    chosen.push_back(best / best_norm);
  }
  return chosen;
}

// vec(x) = [x1; -conj(x2)]  ->  quaternion column (w,x,y,z components).
inline void unvec_into(const ComplexVector& v, QuatMatrix& q, Eigen::Index col) {
  const Eigen::Index m = v.size() / 2;
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::complex<double> x1 = v(i);
    const std::complex<double> x2 = -std::conj(v(m + i));
    q.w(i, col) = x1.real();
    q.x(i, col) = x1.imag();
    q.y(i, col) = x2.real();
    q.z(i, col) = x2.imag();
  }
}

// Splits adjoint value indices 0..(total-1) into clusters of nearly equal
// values; pairs never straddle a cluster boundary.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> value_clusters(
    const Eigen::VectorXd& s2, Eigen::Index total) {
  auto sval = [&](Eigen::Index i) { return i < s2.size() ? s2(i) : 0.0; };
  const double tol = 1e-8 * std::max(sval(0), 1e-300);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index lo = 0;
  while (lo < total) {
    Eigen::Index hi = lo + 1;
    while (hi < total && sval(hi - 1) - sval(hi) <= tol) ++hi;
    if ((hi - lo) % 2 != 0) ++hi;
    hi = std::min(hi, total);
    out.emplace_back(lo, hi);
    lo = hi;
  }
  return out;
}

}  // namespace detail

/// Singular values only (descending). Cheaper than the full factorization.
inline Eigen::VectorXd qsvd_values(const QuatMatrix& a) {
  const Eigen::Index k = std::min(a.rows(), a.cols());
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(k);
  if (fro_norm(a) == 0.0) return sigma;
  Eigen::VectorXd s2;
  detail::complex_svd(complex_adjoint(a).mat, s2, nullptr, nullptr, 'N');
  detail::check_pairing(s2, k);
  for (Eigen::Index i = 0; i < k; ++i) sigma(i) = s2(2 * i);
  return sigma;
}

/// Full quaternion SVD. The zero matrix yields U = I, V = I, sigma = 0;
/// callers relying on qnof_value must guard that case themselves.
inline QsvdFactors qsvd(const QuatMatrix& a) {
  const Eigen::Index m = a.rows(), n = a.cols();
  const Eigen::Index k = std::min(m, n);
  QsvdFactors f;
  f.sigma = Eigen::VectorXd::Zero(k);
  if (fro_norm(a) == 0.0) {
    f.u = QuatMatrix::identity(m);
    f.v = QuatMatrix::identity(n);
    return f;
  }

  const ComplexMatrix chi = complex_adjoint(a).mat;
  ComplexMatrix u2, vh2;
  Eigen::VectorXd s2;
  detail::complex_svd(chi, s2, &u2, &vh2, 'A');
  detail::check_pairing(s2, k);
  for (Eigen::Index i = 0; i < k; ++i) f.sigma(i) = s2(2 * i);

  // Right factor: one representative per duplicated value, selected
  // cluster by cluster so degenerate groups stay mutually orthogonal.
  const ComplexMatrix v2 = vh2.adjoint();
  std::vector<ComplexVector> vcols;
  vcols.reserve(static_cast<std::size_t>(n));
  static const std::vector<ComplexVector> kNoPreset;
  for (auto [lo, hi] : detail::value_clusters(s2, 2 * n)) {
    auto reps = detail::pick_representatives(v2.middleCols(lo, hi - lo),
                                             (hi - lo) / 2, kNoPreset);
    for (auto& rep : reps) vcols.push_back(std::move(rep));
  }

  // Left factor: u_i = chi(A) v_i / sigma_i above the noise floor,
  // re-orthogonalized for hygiene; the tail is completed from the
  // adjoint's own left singular vectors.
  std::vector<ComplexVector> ucols;
  ucols.reserve(static_cast<std::size_t>(m));
  const double sigma_floor = 1e-12 * s2(0);
  for (Eigen::Index i = 0; i < k && f.sigma(i) > sigma_floor; ++i) {
    ComplexVector u = chi * vcols[static_cast<std::size_t>(i)] / f.sigma(i);
    detail::j_orthogonalize(u, ucols);
    const double nrm = u.norm();
    if (nrm <= 0.5)
      throw std::runtime_error("qsvd: left factor extraction failed");
    ucols.push_back(u / nrm);
  }
  if (std::ssize(ucols) < m) {
    auto fill = detail::pick_representatives(u2, m - std::ssize(ucols), ucols);
    for (auto& rep : fill) ucols.push_back(std::move(rep));
  }

  f.u = QuatMatrix(m, m);
  f.v = QuatMatrix(n, n);
  for (Eigen::Index i = 0; i < m; ++i)
    detail::unvec_into(ucols[static_cast<std::size_t>(i)], f.u, i);
  for (Eigen::Index i = 0; i < n; ++i)
    detail::unvec_into(vcols[static_cast<std::size_t>(i)], f.v, i);
  return f;
}

inline double nuclear_norm(const QuatMatrix& a) { return qsvd_values(a).sum(); }

/// ||A||_* / ||A||_F. Scale-invariant; 1 <= value <= sqrt(rank).
inline double qnof_value(const QuatMatrix& a) {
  const Eigen::VectorXd sigma = qsvd_values(a);
  const double fro = sigma.norm();
  if (fro == 0.0)
    throw std::domain_error("qnof_value: undefined for the zero matrix");
  return sigma.sum() / fro;
}

/// Entries above rel_tol * sigma[0]; the zero spectrum has rank 0.
inline Eigen::Index numeric_rank(const Eigen::VectorXd& sigma, double rel_tol) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double cut = rel_tol * sigma(0);
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > cut) ++r;
  return r;
}

inline Eigen::Index numeric_rank(const QuatMatrix& a, double rel_tol = 1e-6) {
  return numeric_rank(qsvd_values(a), rel_tol);
}

/// Orthonormalizes the columns of a square quaternion matrix by modified
/// Gram-Schmidt with left coefficients. Used to build unitary test inputs.
inline QuatMatrix quat_gram_schmidt(const QuatMatrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("quat_gram_schmidt: square input required");
  const Eigen::Index n = a.rows();
  QuatMatrix q = a;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index p = 0; p < j; ++p) {
        Quaternion coeff{0, 0, 0, 0};  // q_p^* q_j
        for (Eigen::Index i = 0; i < n; ++i)
          coeff = coeff + qmul(conj(q(i, p)), q(i, j));
        for (Eigen::Index i = 0; i < n; ++i)
          q.set(i, j, q(i, j) - qmul(q(i, p), coeff));
      }
    }
    double nrm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Quaternion e = q(i, j);
      nrm += e.w * e.w + e.x * e.x + e.y * e.y + e.z * e.z;
    }
    nrm = std::sqrt(nrm);
    if (nrm == 0.0)
      throw std::invalid_argument("quat_gram_schmidt: rank-deficient input");
    for (Eigen::Index i = 0; i < n; ++i) q.set(i, j, q(i, j) * (1.0 / nrm));
  }
  return q;
}

}  // namespace qnof
