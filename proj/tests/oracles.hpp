#pragma once

// Straight-line oracles used only by tests. Nothing here calls into the
// library's kernels; only plain data types and the public weight generator
// are shared.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "attnslam/encoder.hpp"
#include "attnslam/fusion.hpp"
#include "attnslam/tensor.hpp"

namespace attnslam::oracle {

inline std::vector<double> minmax(const std::vector<double>& v) {
  double lo = v[0], hi = v[0];
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::vector<double> out(v.size(), 0.0);
  if (hi > lo) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / (hi - lo);
  }
  return out;
}

/// Fusion in double precision written directly from the four formulas.
inline std::vector<double> fuse(const Tensor& l, const Tensor& g, FusionStrategy s) {
  const std::size_t C = l.dims().channels, P = l.dims().plane();
  std::vector<double> L(l.data().begin(), l.data().end());
  std::vector<double> G(g.data().begin(), g.data().end());
  std::vector<double> mask(C * P, 1.0);
  bool exponential = false;
  switch (s) {
    case FusionStrategy::kBaseline:
      return L;
    case FusionStrategy::kEam:
      exponential = true;
      [[fallthrough]];
    case FusionStrategy::kDam:
      mask = minmax(G);
      break;
    case FusionStrategy::kEga:
      exponential = true;
      [[fallthrough]];
    case FusionStrategy::kGaf: {
      std::vector<double> sum(P, 0.0);
      for (std::size_t c = 0; c < C; ++c) {
        std::vector<double> ch(G.begin() + c * P, G.begin() + (c + 1) * P);
        const auto n = minmax(ch);
        for (std::size_t p = 0; p < P; ++p) sum[p] += n[p];
      }
      const auto sal = minmax(sum);
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t p = 0; p < P; ++p) mask[c * P + p] = sal[p];
      break;
    }
  }
  std::vector<double> out(C * P);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = L[i] * (exponential ? std::exp(mask[i]) : mask[i]);
  }
  return out;
}

/// tanh(W x) with x assembled index by index from the pooling and regrid
/// definitions, weights regenerated from the counter generator.
inline std::vector<double> encode(const Tensor& f, const EncoderConfig& cfg) {
  const std::uint32_t C = f.dims().channels, H = f.dims().height, W = f.dims().width;
  const std::uint32_t chunk = C / 8;
  const std::size_t n = std::size_t{C} / 2 * H * W;
  std::vector<double> x(n);
  for (std::uint32_t h = 0; h < H; ++h)
    for (std::uint32_t w = 0; w < W; ++w)
      for (std::uint32_t q = 0; q < 4; ++q)
        for (std::uint32_t c = 0; c < chunk; ++c) {
          const std::uint32_t pooled = q * chunk + c;
          const double v = (double(f.at(2 * pooled, h, w)) + double(f.at(2 * pooled + 1, h, w))) / 2.0;
          const std::uint32_t y = 2 * h + q / 2, xx = 2 * w + q % 2;
          x[(std::size_t{y} * 2 * W + xx) * chunk + c] = v;
        }
  std::vector<double> out;
  for (std::uint32_t r = 0; r < cfg.num_rnns; ++r)
    for (std::uint32_t i = 0; i < cfg.k; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += double(counter_uniform(cfg.seed, r, i * n + j)) * x[j];
      out.push_back(std::tanh(acc));
    }
  return out;
}

/// Horn's closed-form quaternion solution: the optimal rotation is the top
/// eigenvector of the symmetric 4x4 matrix built from the cross-covariance.
inline std::pair<Eigen::Matrix3d, Eigen::Vector3d> horn_align(const std::vector<Eigen::Vector3d>& src,
                                                              const std::vector<Eigen::Vector3d>& dst) {
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= double(src.size());
  cd /= double(src.size());
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) M += (src[i] - cs) * (dst[i] - cd).transpose();
  const double Sxx = M(0, 0), Sxy = M(0, 1), Sxz = M(0, 2);
  const double Syx = M(1, 0), Syy = M(1, 1), Syz = M(1, 2);
  const double Szx = M(2, 0), Szy = M(2, 1), Szz = M(2, 2);
  Eigen::Matrix4d N;
  N << Sxx + Syy + Szz, Syz - Szy, Szx - Sxz, Sxy - Syx,
       Syz - Szy, Sxx - Syy - Szz, Sxy + Syx, Szx + Sxz,
       Szx - Sxz, Sxy + Syx, -Sxx + Syy - Szz, Syz + Szy,
       Sxy - Syx, Szx + Sxz, Syz + Szy, -Sxx - Syy + Szz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(N);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);
  const Eigen::Matrix3d R = Eigen::Quaterniond(q(0), q(1), q(2), q(3)).normalized().toRotationMatrix();
  return {R, cd - R * cs};
}

inline Tensor random_tensor(TensorDims dims, std::mt19937_64& rng, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  Tensor t(dims);
  for (float& v : t.data()) v = u(rng);
  return t;
}

}  // namespace attnslam::oracle
