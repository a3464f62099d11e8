#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace attnslam {

/// Timestamped rigid pose; `rotation` is kept unit-norm.
struct TrajectoryPose {
  double timestamp = 0.0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
};

/// Reads "timestamp tx ty tz qx qy qz qw" lines; blank lines and lines
/// starting with '#' are skipped. Output is sorted by timestamp (stable) and
/// quaternions are normalized. Throws FormatError naming the line number.
std::vector<TrajectoryPose> parse_trajectory(std::istream& in);
std::vector<TrajectoryPose> parse_trajectory(const std::filesystem::path& path);

void write_trajectory(std::span<const TrajectoryPose> poses,
                      const std::filesystem::path& path);

struct AlignedPair {
  TrajectoryPose est;
  TrajectoryPose gt;
  double gap = 0.0;  // |est.timestamp - gt.timestamp|
};

/// Greedy timestamp matching: all (est, gt) pairs with gap <= max_diff are
/// taken smallest gap first, each pose at most once. Result is ordered by
/// estimate timestamp. Throws ValidationError when nothing pairs up.
std::vector<AlignedPair> associate(std::span<const TrajectoryPose> est,
                                   std::span<const TrajectoryPose> gt,
                                   double max_diff = 0.02);

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
};

/// Least-squares rotation and translation (no scale) mapping src onto dst,
/// via the SVD of the centered cross-covariance with a reflection guard.
/// Throws ValidationError for fewer than 3 points or collinear input.
RigidTransform rigid_align(std::span<const Eigen::Vector3d> src,
                           std::span<const Eigen::Vector3d> dst);

struct AteResult {
  double rmse = 0.0;
  std::vector<double> errors;  // per pair, meters
  RigidTransform transform;    // identity when not aligned
};

AteResult absolute_trajectory_error(std::span<const AlignedPair> pairs, bool aligned = true);

/// RMS of translational error in meters.
inline double ate_rmse(std::span<const AlignedPair> pairs, bool aligned = true) {
  return absolute_trajectory_error(pairs, aligned).rmse;
}

/// Geodesic angle between two rotations, degrees in [0, 180].
double rotation_angle_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

}  // namespace attnslam
