#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qnof/quat_matrix.hpp"
#include "qnof/quaternion.hpp"
#include "qnof/rng.hpp"

using namespace qnof;

namespace {

Quaternion random_quat(Rng& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng), g(rng), g(rng)};
}

// Entrywise scalar-loop product, the oracle for the matrix-level routine.
QuatMatrix qmat_mul_scalar(const QuatMatrix& a, const QuatMatrix& b) {
  QuatMatrix out(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < b.cols(); ++k) {
      Quaternion acc{0, 0, 0, 0};
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        acc = acc + qmul(a(i, j), b(j, k));
      out.set(i, k, acc);
    }
  return out;
}

}  // namespace

TEST_CASE("Hamilton table holds exactly") {
  const auto i = Quaternion::i(), j = Quaternion::j(), k = Quaternion::k();
  CHECK(qmul(i, i) == -Quaternion::one());
  CHECK(qmul(j, j) == -Quaternion::one());
  CHECK(qmul(k, k) == -Quaternion::one());
  CHECK(qmul(qmul(i, j), k) == -Quaternion::one());
  CHECK(qmul(i, j) == k);
  CHECK(qmul(j, i) == -k);
  CHECK(qmul(j, k) == i);
  CHECK(qmul(k, j) == -i);
  CHECK(qmul(k, i) == j);
  CHECK(qmul(i, k) == -j);
}

TEST_CASE("unit and conjugation identities") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Quaternion q = random_quat(rng);
    CHECK(qmul(Quaternion::one(), q) == q);
    CHECK(conj(conj(q)) == q);
  }
}

TEST_CASE("(1+i)(1+j) = 1 + i + j + k") {
  const Quaternion a{1, 1, 0, 0}, b{1, 0, 1, 0};
  CHECK(qmul(a, b) == Quaternion{1, 1, 1, 1});
}

TEST_CASE("modulus is multiplicative") {
  Rng rng(11);
  for (int trial = 0; trial < 10000; ++trial) {
    const Quaternion a = random_quat(rng), b = random_quat(rng);
    const double lhs = modulus(qmul(a, b));
    const double rhs = modulus(a) * modulus(b);
    CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, rhs));
  }
}

TEST_CASE("matrix product against the scalar-loop oracle") {
  Rng rng(3);
  const QuatMatrix a = random_normal_quat(3, 3, rng);
  const QuatMatrix b = random_normal_quat(3, 3, rng);
  const QuatMatrix fast = qmat_mul(a, b);
  const QuatMatrix slow = qmat_mul_scalar(a, b);
  CHECK(fro_norm(fast - slow) <= 1e-12 * fro_norm(slow));

  const QuatMatrix ident = QuatMatrix::identity(3);
  CHECK(fro_norm(qmat_mul(a, ident) - a) == 0.0);
}

TEST_CASE("scalar basis case lifted to matrices: (iI)(jI) = kI") {
  QuatMatrix iI(2, 2), jI(2, 2), kI(2, 2);
  iI.x = RealMatrix::Identity(2, 2);
  jI.y = RealMatrix::Identity(2, 2);
  kI.z = RealMatrix::Identity(2, 2);
  CHECK(fro_norm(qmat_mul(iI, jI) - kI) == 0.0);
  CHECK(fro_norm(qmat_mul(jI, iI) + kI) == 0.0);
}

TEST_CASE("conjugate transpose involution and product rule") {
  Rng rng(5);
  const QuatMatrix a = random_normal_quat(4, 6, rng);
  const QuatMatrix b = random_normal_quat(6, 3, rng);
  CHECK(fro_norm(conj_transpose(conj_transpose(a)) - a) == 0.0);

  // (AB)* = B* A*
  const QuatMatrix lhs = conj_transpose(qmat_mul(a, b));
  const QuatMatrix rhs = qmat_mul(conj_transpose(b), conj_transpose(a));
  CHECK(fro_norm(lhs - rhs) <= 1e-12 * std::max(1.0, fro_norm(rhs)));

  QuatMatrix one_by_one(1, 1);
  one_by_one.set(0, 0, Quaternion::i());
  CHECK(conj_transpose(one_by_one)(0, 0) == -Quaternion::i());

  QuatMatrix real_diag = QuatMatrix::diagonal(Eigen::Vector2d(2.0, 3.0), 2, 2);
  CHECK(fro_norm(conj_transpose(real_diag) - real_diag) == 0.0);
}

TEST_CASE("norms") {
  const QuatMatrix zero(3, 4);
  const MatrixNorms nz = norms(zero);
  CHECK(nz.l1 == 0.0);
  CHECK(nz.linf == 0.0);
  CHECK(nz.fro == 0.0);

  QuatMatrix ones(1, 1);
  ones.set(0, 0, Quaternion{1, 1, 1, 1});
  const MatrixNorms n1 = norms(ones);
  CHECK(n1.l1 == Catch::Approx(2.0));
  CHECK(n1.linf == Catch::Approx(2.0));
  CHECK(n1.fro == Catch::Approx(2.0));

  // fro^2 equals the sum of squared real components
  Rng rng(13);
  const QuatMatrix a = random_normal_quat(5, 7, rng);
  double comp = a.w.squaredNorm() + a.x.squaredNorm() + a.y.squaredNorm() +
                a.z.squaredNorm();
  CHECK(norms(a).fro * norms(a).fro == Catch::Approx(comp).epsilon(1e-12));
}

TEST_CASE("real inner product") {
  Rng rng(17);
  const QuatMatrix a = random_normal_quat(4, 4, rng);
  const QuatMatrix b = random_normal_quat(4, 4, rng);

  CHECK(real_inner(a, a) ==
        Catch::Approx(fro_norm(a) * fro_norm(a)).epsilon(1e-12));
  CHECK(real_inner(a, b) == Catch::Approx(real_inner(b, a)));

  // Re(Tr(A*B)) via the scalar definition
  double direct = 0.0;
  const QuatMatrix ab = qmat_mul(conj_transpose(a), b);
  for (Eigen::Index i = 0; i < ab.rows(); ++i) direct += ab(i, i).w;
  CHECK(real_inner(a, b) == Catch::Approx(direct).epsilon(1e-12));

  QuatMatrix iI(2, 2), jI(2, 2);
  iI.x = RealMatrix::Identity(2, 2);
  jI.y = RealMatrix::Identity(2, 2);
  CHECK(real_inner(iI, jI) == 0.0);
}

TEST_CASE("mask projection partitions the matrix") {
  Rng rng(19);
  const QuatMatrix a = random_normal_quat(6, 5, rng);
  Mask omega(6, 5);
  std::bernoulli_distribution coin(0.4);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) omega(i, j) = coin(rng);

  const QuatMatrix kept = project_mask(a, omega, true);
  const QuatMatrix dropped = project_mask(a, omega, false);
  CHECK(fro_norm(kept + dropped - a) == 0.0);

  const Mask all = Mask::Constant(6, 5, true);
  CHECK(fro_norm(project_mask(a, all, true) - a) == 0.0);
  CHECK(fro_norm(project_mask(a, all, false)) == 0.0);

  CHECK_THROWS_AS(project_mask(a, Mask::Constant(2, 2, true)),
                  std::invalid_argument);
  CHECK_THROWS_AS(qmat_mul(a, a), std::invalid_argument);
}
