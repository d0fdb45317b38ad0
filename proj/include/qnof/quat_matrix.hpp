// Dense quaternion matrices stored as four real component matrices.
//
// Storage is component-planar (W, X, Y, Z as separate m-by-n real matrices):
// every solver update is either componentwise or modulus-based, so this
// layout keeps masking and thresholding cache-friendly. Reductions iterate
// in a fixed order so repeated runs are bit-reproducible.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "qnof/quaternion.hpp"

namespace qnof {

using RealMatrix = Eigen::MatrixXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct QuatMatrix {
  RealMatrix w, x, y, z;

  QuatMatrix() = default;

  QuatMatrix(Eigen::Index rows, Eigen::Index cols)
      : w(RealMatrix::Zero(rows, cols)),
        x(RealMatrix::Zero(rows, cols)),
        y(RealMatrix::Zero(rows, cols)),
        z(RealMatrix::Zero(rows, cols)) {}

  QuatMatrix(RealMatrix w_, RealMatrix x_, RealMatrix y_, RealMatrix z_)
      : w(std::move(w_)), x(std::move(x_)), y(std::move(y_)), z(std::move(z_)) {
    if (x.rows() != w.rows() || y.rows() != w.rows() || z.rows() != w.rows() ||
        x.cols() != w.cols() || y.cols() != w.cols() || z.cols() != w.cols()) {
      throw std::invalid_argument("QuatMatrix: component dimensions differ");
    }
  }

  static QuatMatrix zero(Eigen::Index rows, Eigen::Index cols) {
    return QuatMatrix(rows, cols);
  }

  static QuatMatrix identity(Eigen::Index n) {
    QuatMatrix q(n, n);
    q.w = RealMatrix::Identity(n, n);
    return q;
  }

  /// Real diagonal matrix (rectangular allowed; values on the main diagonal).
  static QuatMatrix diagonal(const Eigen::VectorXd& d, Eigen::Index rows,
                             Eigen::Index cols) {
    QuatMatrix q(rows, cols);
    const Eigen::Index k = std::min({rows, cols, d.size()});
    for (Eigen::Index i = 0; i < k; ++i) q.w(i, i) = d(i);
    return q;
  }

  Eigen::Index rows() const { return w.rows(); }
  Eigen::Index cols() const { return w.cols(); }

  Quaternion operator()(Eigen::Index i, Eigen::Index j) const {
    return {w(i, j), x(i, j), y(i, j), z(i, j)};
  }

  void set(Eigen::Index i, Eigen::Index j, Quaternion q) {
    w(i, j) = q.w;
    x(i, j) = q.x;
    y(i, j) = q.y;
    z(i, j) = q.z;
  }

  bool is_pure(double tol = 0.0) const {
    return w.cwiseAbs().maxCoeff() <= tol;
  }
};

inline void check_same_shape(const QuatMatrix& a, const QuatMatrix& b,
                             const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

inline QuatMatrix operator+(const QuatMatrix& a, const QuatMatrix& b) {
  check_same_shape(a, b, "operator+");
  return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
}

inline QuatMatrix operator-(const QuatMatrix& a, const QuatMatrix& b) {
  check_same_shape(a, b, "operator-");
  return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z};
}

inline QuatMatrix operator*(double s, const QuatMatrix& a) {
  return {s * a.w, s * a.x, s * a.y, s * a.z};
}

inline QuatMatrix operator*(const QuatMatrix& a, double s) { return s * a; }

/// Quaternion matrix product, order preserved: (AB)_ik = sum_j A_ij B_jk.
inline QuatMatrix qmat_mul(const QuatMatrix& a, const QuatMatrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("qmat_mul: inner dimensions differ");
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

/// (A*)_ij = conj(A_ji).
inline QuatMatrix conj_transpose(const QuatMatrix& a) {
  return {a.w.transpose(), (-a.x).transpose(), (-a.y).transpose(),
          (-a.z).transpose()};
}

/// Entrywise modulus |a_ij| as a real matrix.
inline RealMatrix entry_modulus(const QuatMatrix& a) {
  return (a.w.array().square() + a.x.array().square() + a.y.array().square() +
          a.z.array().square())
      .sqrt()
      .matrix();
}

struct MatrixNorms {
  double l1 = 0.0;
  double linf = 0.0;
  double fro = 0.0;
};

inline double fro_norm(const QuatMatrix& a) {
  return std::sqrt(a.w.squaredNorm() + a.x.squaredNorm() + a.y.squaredNorm() +
                   a.z.squaredNorm());
}

inline MatrixNorms norms(const QuatMatrix& a) {
  MatrixNorms n;
  const RealMatrix mod = entry_modulus(a);
  n.l1 = mod.sum();
  n.linf = mod.size() > 0 ? mod.maxCoeff() : 0.0;
  n.fro = fro_norm(a);
  return n;
}

/// Re(Tr(A* B)); symmetric in (A, B), and real_inner(A, A) = fro(A)^2.
inline double real_inner(const QuatMatrix& a, const QuatMatrix& b) {
  check_same_shape(a, b, "real_inner");
  return a.w.cwiseProduct(b.w).sum() + a.x.cwiseProduct(b.x).sum() +
         a.y.cwiseProduct(b.y).sum() + a.z.cwiseProduct(b.z).sum();
}

/// Zeroes entries outside the selected set. keep_observed=true keeps Omega
/// (P_Omega); false keeps the complement.
inline QuatMatrix project_mask(const QuatMatrix& a, const Mask& omega,
                               bool keep_observed = true) {
  if (a.rows() != omega.rows() || a.cols() != omega.cols())
    throw std::invalid_argument("project_mask: dimension mismatch");
  const Mask keep = keep_observed ? omega : Mask(!omega);
  QuatMatrix out(a.rows(), a.cols());
  out.w = keep.select(a.w, 0.0);
  out.x = keep.select(a.x, 0.0);
  out.y = keep.select(a.y, 0.0);
  out.z = keep.select(a.z, 0.0);
  return out;
}

}  // namespace qnof
