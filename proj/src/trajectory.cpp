#include "attnslam/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <tuple>

#include <Eigen/SVD>

#include "attnslam/error.hpp"

namespace attnslam {

std::vector<TrajectoryPose> parse_trajectory(std::istream& in) {
  std::vector<TrajectoryPose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    double v[8];
    for (double& x : v) {
      if (!(fields >> x)) {
        throw FormatError("trajectory line " + std::to_string(line_no) +
                          ": expected 8 numbers 'timestamp tx ty tz qx qy qz qw'");
      }
    }
    std::string extra;
    if (fields >> extra) {
      throw FormatError("trajectory line " + std::to_string(line_no) + ": unexpected trailing field '" +
                        extra + "'");
    }
    if (!std::all_of(std::begin(v), std::end(v), [](double x) { return std::isfinite(x); })) {
      throw FormatError("trajectory line " + std::to_string(line_no) + ": non-finite value");
    }
    TrajectoryPose p;
    p.timestamp = v[0];
    p.translation = Eigen::Vector3d(v[1], v[2], v[3]);
    p.rotation = Eigen::Quaterniond(v[7], v[4], v[5], v[6]);
    const double norm = p.rotation.norm();
    if (!(norm > 0.0)) {
      throw FormatError("trajectory line " + std::to_string(line_no) + ": zero quaternion");
    }
    p.rotation.coeffs() /= norm;
    poses.push_back(p);
  }
  std::stable_sort(poses.begin(), poses.end(),
                   [](const TrajectoryPose& a, const TrajectoryPose& b) { return a.timestamp < b.timestamp; });
  return poses;
}

std::vector<TrajectoryPose> parse_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory: " + path.string());
  try {
    return parse_trajectory(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_trajectory(std::span<const TrajectoryPose> poses, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "# timestamp tx ty tz qx qy qz qw\n" << std::setprecision(17);
  for (const TrajectoryPose& p : poses) {
    const auto& q = p.rotation;
    out << p.timestamp << ' ' << p.translation.x()
        << ' ' << p.translation.y() << ' ' << p.translation.z() << ' ' << q.x() << ' ' << q.y() << ' '
        << q.z() << ' ' << q.w() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<AlignedPair> associate(std::span<const TrajectoryPose> est,
                                   std::span<const TrajectoryPose> gt, double max_diff) {
  if (est.empty() || gt.empty()) throw ValidationError("associate: empty trajectory");

  std::vector<std::size_t> gt_order(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) gt_order[i] = i;
  std::stable_sort(gt_order.begin(), gt_order.end(),
                   [&](std::size_t a, std::size_t b) { return gt[a].timestamp < gt[b].timestamp; });

  struct Candidate {
    double gap;
    std::size_t est;
    std::size_t gt;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double t = est[i].timestamp;
    auto it = std::lower_bound(gt_order.begin(), gt_order.end(), t - max_diff,
                               [&](std::size_t g, double v) { return gt[g].timestamp < v; });
    for (; it != gt_order.end() && gt[*it].timestamp <= t + max_diff; ++it) {
      const double gap = std::abs(gt[*it].timestamp - t);
      if (gap <= max_diff) candidates.push_back({gap, i, *it});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.gap, a.est, a.gt) < std::tie(b.gap, b.est, b.gt);
  });

  std::vector<bool> est_used(est.size(), false), gt_used(gt.size(), false);
  std::vector<AlignedPair> pairs;
  for (const Candidate& c : candidates) {
    if (est_used[c.est] || gt_used[c.gt]) continue;
    est_used[c.est] = gt_used[c.gt] = true;
    pairs.push_back({est[c.est], gt[c.gt], c.gap});
  }
  if (pairs.empty()) throw ValidationError("associate: no timestamp pairs within max_diff");
  std::stable_sort(pairs.begin(), pairs.end(), [](const AlignedPair& a, const AlignedPair& b) {
    return a.est.timestamp < b.est.timestamp;
  });
  return pairs;
}

RigidTransform rigid_align(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst) {
  if (src.size() != dst.size()) throw ValidationError("rigid_align: point counts differ");
  if (src.size() < 3) throw ValidationError("rigid_align: need at least 3 point pairs");

  const double n = static_cast<double>(src.size());
  Eigen::Vector3d mu_src = Eigen::Vector3d::Zero(), mu_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= n;
  mu_dst /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cov += (src[i] - mu_src) * (dst[i] - mu_dst).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  // A rank below 2 leaves the rotation about the point line undetermined.
  if (!(s(0) > 0.0) || s(1) <= 1e-12 * s(0)) {
    throw ValidationError("rigid_align: degenerate (collinear or coincident) point set");
  }
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  RigidTransform tf;
  tf.rotation = v * d * u.transpose();
  tf.translation = mu_dst - tf.rotation * mu_src;
  return tf;
}

AteResult absolute_trajectory_error(std::span<const AlignedPair> pairs, bool aligned) {
  if (pairs.empty()) throw ValidationError("ate: no pairs");
  AteResult result;
  if (aligned) {
    std::vector<Eigen::Vector3d> src, dst;
    src.reserve(pairs.size());
    dst.reserve(pairs.size());
    for (const AlignedPair& p : pairs) {
      src.push_back(p.est.translation);
      dst.push_back(p.gt.translation);
    }
    result.transform = rigid_align(src, dst);
  }
  double sum = 0.0;
  result.errors.reserve(pairs.size());
  for (const AlignedPair& p : pairs) {
    const double e = (result.transform.apply(p.est.translation) - p.gt.translation).norm();
    result.errors.push_back(e);
    sum += e * e;
  }
  result.rmse = std::sqrt(sum / static_cast<double>(pairs.size()));
  return result;
}

double rotation_angle_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const double dot = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return 2.0 * std::acos(dot) * 180.0 / 3.14159265358979323846;
}

}  // namespace attnslam
