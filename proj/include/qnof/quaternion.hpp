// Quaternion scalar arithmetic over the Hamilton basis {1, i, j, k}.
#pragma once

#include <cmath>

namespace qnof {

struct Quaternion {
  double w = 0.0;  // coefficient of 1
  double x = 0.0;  // coefficient of i
  double y = 0.0;  // coefficient of j
  double z = 0.0;  // coefficient of k

  constexpr Quaternion() = default;
  constexpr Quaternion(double w_, double x_, double y_, double z_)
      : w(w_), x(x_), y(y_), z(z_) {}

  static constexpr Quaternion one() { return {1, 0, 0, 0}; }
  static constexpr Quaternion i() { return {0, 1, 0, 0}; }
  static constexpr Quaternion j() { return {0, 0, 1, 0}; }
  static constexpr Quaternion k() { return {0, 0, 0, 1}; }

  constexpr bool is_pure() const { return w == 0.0; }
};

constexpr Quaternion operator+(Quaternion a, Quaternion b) {
  return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
}

constexpr Quaternion operator-(Quaternion a, Quaternion b) {
  return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z};
}

constexpr Quaternion operator-(Quaternion a) { return {-a.w, -a.x, -a.y, -a.z}; }

constexpr Quaternion operator*(double s, Quaternion a) {
  return {s * a.w, s * a.x, s * a.y, s * a.z};
}

constexpr Quaternion operator*(Quaternion a, double s) { return s * a; }

/// Hamilton product. Not commutative: ij = k but ji = -k.
constexpr Quaternion qmul(Quaternion a, Quaternion b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

constexpr Quaternion operator*(Quaternion a, Quaternion b) { return qmul(a, b); }

constexpr Quaternion conj(Quaternion a) { return {a.w, -a.x, -a.y, -a.z}; }

inline double modulus(Quaternion a) {
  return std::sqrt(a.w * a.w + a.x * a.x + a.y * a.y + a.z * a.z);
}

constexpr bool operator==(Quaternion a, Quaternion b) {
  return a.w == b.w && a.x == b.x && a.y == b.y && a.z == b.z;
}

}  // namespace qnof
