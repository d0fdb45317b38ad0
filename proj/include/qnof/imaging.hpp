// Color-image handling: pure-quaternion encoding, corruption generators,
// and the PSNR / SSIM quality metrics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "qnof/quat_matrix.hpp"
#include "qnof/rng.hpp"

namespace qnof {

struct ColorImage {
  RealMatrix r, g, b;  // values in [0, 1]

  ColorImage() = default;
  ColorImage(Eigen::Index height, Eigen::Index width)
      : r(RealMatrix::Zero(height, width)),
        g(RealMatrix::Zero(height, width)),
        b(RealMatrix::Zero(height, width)) {}

  Eigen::Index height() const { return r.rows(); }
  Eigen::Index width() const { return r.cols(); }

  void clamp() {
    r = r.cwiseMax(0.0).cwiseMin(1.0);
    g = g.cwiseMax(0.0).cwiseMin(1.0);
    b = b.cwiseMax(0.0).cwiseMin(1.0);
  }
};

enum class ImpulseModel {
  kRandomValued,  // independent uniform [0,1] channel values
  kSaltPepper,    // each channel forced to 0 or 1
};

struct CorruptionSpec {
  double miss_rate = 0.0;     // in [0, 1)
  double impulse_rate = 0.0;  // in [0, 1)
  std::uint64_t seed = 0;
  ImpulseModel model = ImpulseModel::kRandomValued;
};

/// RGB channels mapped onto the imaginary axes; the real part is zero.
inline QuatMatrix image_to_quat(const ColorImage& img) {
  QuatMatrix q(img.height(), img.width());
  q.x = img.r;
  q.y = img.g;
  q.z = img.b;
  return q;
}

/// Inverse encoding. Any real part is discarded; channels clamp to [0,1].
inline ColorImage quat_to_image(const QuatMatrix& q) {
  ColorImage img(q.rows(), q.cols());
  img.r = q.x;
  img.g = q.y;
  img.b = q.z;
  img.clamp();
  return img;
}

/// 10 log10(peak^2 / MSE), MSE averaged over all pixels and channels.
/// Identical images report +infinity.
inline double psnr(const ColorImage& u, const ColorImage& uhat,
                   double peak = 1.0) {
  if (u.height() != uhat.height() || u.width() != uhat.width())
    throw std::invalid_argument("psnr: dimension mismatch");
  const double n = 3.0 * double(u.height()) * double(u.width());
  const double mse = ((u.r - uhat.r).squaredNorm() +
                      (u.g - uhat.g).squaredNorm() +
                      (u.b - uhat.b).squaredNorm()) /
                     n;
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace detail {

// Mean SSIM of one channel: 8x8 sliding windows at unit stride, plain
// window means, biased variances, c1 = (0.01 peak)^2, c2 = (0.03 peak)^2.
// Window sums come from a summed-area table.
inline double ssim_channel(const RealMatrix& u, const RealMatrix& v,
                           double peak, int win) {
  const Eigen::Index h = u.rows(), w = u.cols();
  const Eigen::Index side = std::min<Eigen::Index>(win, std::min(h, w));
  auto sat = [](const RealMatrix& m) {
    RealMatrix s = RealMatrix::Zero(m.rows() + 1, m.cols() + 1);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        s(i + 1, j + 1) = m(i, j) + s(i, j + 1) + s(i + 1, j) - s(i, j);
    return s;
  };
  const RealMatrix su = sat(u), sv = sat(v);
  const RealMatrix suu = sat(u.cwiseProduct(u)), svv = sat(v.cwiseProduct(v));
  const RealMatrix suv = sat(u.cwiseProduct(v));
  auto box = [&](const RealMatrix& s, Eigen::Index i, Eigen::Index j) {
    return s(i + side, j + side) - s(i, j + side) - s(i + side, j) + s(i, j);
  };
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const double np = double(side) * double(side);
  double acc = 0.0;
  std::int64_t count = 0;
  for (Eigen::Index i = 0; i + side <= h; ++i) {
    for (Eigen::Index j = 0; j + side <= w; ++j) {
      const double mu_u = box(su, i, j) / np;
      const double mu_v = box(sv, i, j) / np;
      const double var_u = box(suu, i, j) / np - mu_u * mu_u;
      const double var_v = box(svv, i, j) / np - mu_v * mu_v;
      const double cov = box(suv, i, j) / np - mu_u * mu_v;
      acc += ((2.0 * mu_u * mu_v + c1) * (2.0 * cov + c2)) /
             ((mu_u * mu_u + mu_v * mu_v + c1) * (var_u + var_v + c2));
      ++count;
    }
  }
  return count > 0 ? acc / double(count) : 1.0;
}

}  // namespace detail

/// Channel-averaged mean SSIM. ssim(u, u) = 1 exactly.
inline double ssim(const ColorImage& u, const ColorImage& uhat,
                   double peak = 1.0, int window = 8) {
  if (u.height() != uhat.height() || u.width() != uhat.width())
    throw std::invalid_argument("ssim: dimension mismatch");
  return (detail::ssim_channel(u.r, uhat.r, peak, window) +
          detail::ssim_channel(u.g, uhat.g, peak, window) +
          detail::ssim_channel(u.b, uhat.b, peak, window)) /
         3.0;
}

struct CorruptedImage {
  QuatMatrix observed;      // impulse-corrupted, zero at missing pixels
  Mask omega;               // true = observed pixel
  QuatMatrix ground_truth;  // clean encoding
};

/// Removes exactly round(miss_rate * pixels) whole pixels and replaces
/// exactly round(impulse_rate * pixels) observed pixels with impulse
/// values. Deterministic under the seed.
inline CorruptedImage corrupt_image(const ColorImage& img,
                                    const CorruptionSpec& spec) {
  if (spec.miss_rate < 0.0 || spec.miss_rate >= 1.0 ||
      spec.impulse_rate < 0.0 || spec.impulse_rate >= 1.0)
    throw std::invalid_argument("corrupt_image: rates must lie in [0, 1)");
  const Eigen::Index h = img.height(), w = img.width();
  const std::int64_t total = std::int64_t(h) * std::int64_t(w);
  const auto n_miss = std::int64_t(std::llround(spec.miss_rate * double(total)));
  const auto n_imp =
      std::int64_t(std::llround(spec.impulse_rate * double(total)));
  if (total - n_miss <= 0)
    throw std::invalid_argument("corrupt_image: no observed pixels left");

  Rng rng(spec.seed);
  // one permutation drives both draws: the first n_miss entries go
  // missing, impulses are drawn from the observed remainder
  auto order = sample_without_replacement(total, total, rng);

  CorruptedImage out;
  out.ground_truth = image_to_quat(img);
  out.observed = out.ground_truth;
  out.omega = Mask::Constant(h, w, true);
  for (std::int64_t i = 0; i < n_miss; ++i) {
    const auto idx = order[static_cast<std::size_t>(i)];
    out.omega(idx % h, idx / h) = false;
  }
  const std::int64_t observed_count = total - n_miss;
  const std::int64_t imp_count = std::min(n_imp, observed_count);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::int64_t i = 0; i < imp_count; ++i) {
    const auto idx = order[static_cast<std::size_t>(n_miss + i)];
    const Eigen::Index row = idx % h, col = idx / h;
    double rv, gv, bv;
    if (spec.model == ImpulseModel::kRandomValued) {
      rv = uni(rng);
      gv = uni(rng);
      bv = uni(rng);
    } else {
      rv = uni(rng) < 0.5 ? 0.0 : 1.0;
      gv = uni(rng) < 0.5 ? 0.0 : 1.0;
      bv = uni(rng) < 0.5 ? 0.0 : 1.0;
    }
    out.observed.set(row, col, Quaternion{0.0, rv, gv, bv});
  }
  out.observed = project_mask(out.observed, out.omega, true);
  return out;
}

}  // namespace qnof
