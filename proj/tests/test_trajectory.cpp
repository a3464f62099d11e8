#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "attnslam/error.hpp"
#include "attnslam/trajectory.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace attnslam;

namespace {

constexpr double kPi = 3.14159265358979323846;

TrajectoryPose pose(double t, double x, double y, double z) {
  TrajectoryPose p;
  p.timestamp = t;
  p.translation = {x, y, z};
  return p;
}

std::vector<TrajectoryPose> random_walk(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> step(0.0, 0.3);
  std::vector<TrajectoryPose> out;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    p += Eigen::Vector3d(step(rng), step(rng), step(rng));
    TrajectoryPose tp;
    tp.timestamp = 0.1 * static_cast<double>(i);
    tp.translation = p;
    out.push_back(tp);
  }
  return out;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

std::vector<AlignedPair> pair_up(const std::vector<TrajectoryPose>& est, const std::vector<TrajectoryPose>& gt) {
  std::vector<AlignedPair> out;
  for (std::size_t i = 0; i < est.size(); ++i) out.push_back({est[i], gt[i], 0.0});
  return out;
}

}  // namespace

TEST_CASE("parse_trajectory") {
  std::istringstream one("1.0 0 0 0 0 0 0 1\n");
  const auto p = parse_trajectory(one);
  REQUIRE(p.size() == 1);
  CHECK(p[0].timestamp == 1.0);
  CHECK(p[0].translation.isZero());
  CHECK(p[0].rotation.isApprox(Eigen::Quaterniond::Identity()));

  std::istringstream comments("# header\n\n# more\n");
  CHECK(parse_trajectory(comments).empty());

  std::istringstream shuffled("3 3 0 0 0 0 0 1\n1 1 0 0 0 0 0 1\n2 2 0 0 0 0 0 2\n");
  const auto s = parse_trajectory(shuffled);
  REQUIRE(s.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(s[i].timestamp == double(i + 1));
    CHECK(s[i].translation.x() == double(i + 1));
    CHECK(s[i].rotation.norm() == doctest::Approx(1.0).epsilon(1e-15));
  }

  std::istringstream bad("1 0 0 0 0 0 0 1\n2 0 0 0 0 0 1\n");
  try {
    parse_trajectory(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream nan("1 nan 0 0 0 0 0 1\n");
  CHECK_THROWS_AS(parse_trajectory(nan), FormatError);
  std::istringstream zero_q("1 0 0 0 0 0 0 0\n");
  CHECK_THROWS_AS(parse_trajectory(zero_q), FormatError);
  CHECK_THROWS_AS(parse_trajectory(std::filesystem::path("/nonexistent/traj.txt")), IoError);
}

TEST_CASE("trajectory file round trip") {
  testing::TempDir dir("traj");
  std::mt19937_64 rng(1);
  auto poses = random_walk(rng, 10);
  for (auto& p : poses) p.rotation = Eigen::Quaterniond(random_rotation(rng));
  write_trajectory(poses, dir / "t.txt");
  const auto back = parse_trajectory(dir / "t.txt");
  REQUIRE(back.size() == poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(back[i].timestamp == poses[i].timestamp);
    CHECK((back[i].translation - poses[i].translation).norm() < 1e-12);
    CHECK(rotation_angle_deg(back[i].rotation, poses[i].rotation) < 1e-6);
  }
}

TEST_CASE("associate") {
  std::vector<TrajectoryPose> a = {pose(0, 0, 0, 0), pose(1, 0, 0, 0), pose(2, 0, 0, 0)};
  const auto same = associate(a, a);
  REQUIRE(same.size() == 3);
  for (const auto& p : same) CHECK(p.gap == 0.0);

  std::vector<TrajectoryPose> shifted = {pose(0.5, 0, 0, 0), pose(1.5, 0, 0, 0), pose(2.5, 0, 0, 0)};
  CHECK_THROWS_AS(associate(a, shifted), ValidationError);

  std::vector<TrajectoryPose> gapped = {pose(0.001, 0, 0, 0), pose(1.015, 0, 0, 0), pose(2.03, 0, 0, 0)};
  const auto pairs = associate(a, gapped);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].est.timestamp == 0.0);
  CHECK(pairs[1].est.timestamp == 1.0);

  // Each pose pairs at most once, smallest gap first.
  std::vector<TrajectoryPose> est = {pose(1.000, 0, 0, 0), pose(1.010, 0, 0, 0)};
  std::vector<TrajectoryPose> gt = {pose(1.008, 0, 0, 0)};
  const auto greedy = associate(est, gt);
  REQUIRE(greedy.size() == 1);
  CHECK(greedy[0].est.timestamp == 1.010);
}

TEST_CASE("rigid_align recovers known transforms") {
  const std::vector<Eigen::Vector3d> pts = {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {0, 0, 3}, {1, 1, 1}};
  const auto id = rigid_align(pts, pts);
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
  CHECK(id.translation.norm() < 1e-9);

  const Eigen::Matrix3d rz = Eigen::AngleAxisd(kPi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Vector3d t(1, 2, 3);
  std::vector<Eigen::Vector3d> moved;
  for (const auto& p : pts) moved.push_back(rz * p + t);
  const auto r = rigid_align(pts, moved);
  CHECK((r.rotation - rz).norm() < 1e-9);
  CHECK((r.translation - t).norm() < 1e-9);

  const std::vector<Eigen::Vector3d> line = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  CHECK_THROWS_AS(rigid_align(line, line), ValidationError);
  CHECK_THROWS_AS(rigid_align(std::span(pts).first(2), std::span(pts).first(2)), ValidationError);
  CHECK_THROWS_AS(rigid_align(pts, std::span(pts).first(4)), ValidationError);
}

TEST_CASE("rigid_align is a proper rotation and agrees with the quaternion method") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Eigen::Vector3d> src, dst;
    const Eigen::Matrix3d r = random_rotation(rng);
    const Eigen::Vector3d t(n(rng), n(rng), n(rng));
    for (int i = 0; i < 12; ++i) {
      src.emplace_back(n(rng), n(rng), n(rng));
      dst.push_back(r * src.back() + t + 0.05 * Eigen::Vector3d(n(rng), n(rng), n(rng)));
    }
    const auto fit = rigid_align(src, dst);
    CHECK(fit.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((fit.rotation.transpose() * fit.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    const auto [hr, ht] = oracle::horn_align(src, dst);
    CHECK((fit.rotation - hr).norm() < 1e-8);
    CHECK((fit.translation - ht).norm() < 1e-8);
  }
}

TEST_CASE("ATE") {
  std::mt19937_64 rng(3);
  const auto gt = random_walk(rng, 50);
  CHECK(ate_rmse(pair_up(gt, gt)) < 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    const auto base = random_walk(rng, 40);
    auto noisy = base;
    std::normal_distribution<double> n(0.0, 0.1);
    for (auto& p : noisy) p.translation += Eigen::Vector3d(n(rng), n(rng), n(rng));
    auto moved = noisy;
    const Eigen::Matrix3d r = random_rotation(rng);
    const Eigen::Vector3d t(5 * n(rng), 5 * n(rng), 5 * n(rng));
    for (auto& p : moved) p.translation = r * p.translation + t;
    CHECK(std::abs(ate_rmse(pair_up(noisy, base)) - ate_rmse(pair_up(moved, base))) < 1e-9);
  }

  const std::vector<TrajectoryPose> square = {pose(0, 0, 0, 0), pose(1, 1, 0, 0), pose(2, 1, 1, 0), pose(3, 0, 1, 0)};
  auto lifted = square;
  lifted[0].translation.z() = 0.2;
  const auto pairs = pair_up(lifted, square);
  const auto aligned = absolute_trajectory_error(pairs, true);
  CHECK(aligned.rmse == doctest::Approx(0.0502469211185731).epsilon(1e-9));
  CHECK(aligned.errors.size() == 4);
  CHECK(ate_rmse(pairs, false) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(absolute_trajectory_error(pairs, false).transform.rotation == Eigen::Matrix3d::Identity());
  CHECK_THROWS_AS(ate_rmse(std::vector<AlignedPair>{}), ValidationError);
}

TEST_CASE("rotation_angle_deg") {
  const Eigen::Quaterniond a = Eigen::Quaterniond::Identity();
  const Eigen::Quaterniond b(Eigen::AngleAxisd(kPi / 6, Eigen::Vector3d::UnitX()));
  CHECK(rotation_angle_deg(a, b) == doctest::Approx(30.0).epsilon(1e-9));
  CHECK(rotation_angle_deg(b, Eigen::Quaterniond(-b.coeffs())) == doctest::Approx(0.0).scale(1.0));
}
