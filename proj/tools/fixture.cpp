#include "fixture.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "attnslam/encoder.hpp"
#include "attnslam/error.hpp"
#include "attnslam/manifest.hpp"
#include "attnslam/tensor_io.hpp"
#include "attnslam/trajectory.hpp"

namespace attnslam::cli {

SyntheticSequence write_synthetic_sequence(const std::filesystem::path& dir, std::uint32_t frames,
                                           std::uint32_t revisits, std::uint64_t seed) {
  if (frames == 0 || revisits >= frames || revisits > frames - revisits) {
    throw ValidationError("synth: need frames > 0 and revisits <= frames / 2");
  }
  std::filesystem::create_directories(dir);
  const TensorDims dims{512, 7, 7};
  const std::uint32_t distinct = frames - revisits;

  SequenceManifest manifest{"synthetic", "vgg16.block5.pool", {}};
  std::vector<TrajectoryPose> gt, est;
  for (std::uint32_t i = 0; i < frames; ++i) {
    const std::uint32_t source = i < distinct ? i : i - distinct;
    Tensor l(dims), g(dims);
    for (std::size_t j = 0; j < l.size(); ++j) {
      // Non-negative activations kept small so tanh stays out of saturation.
      l.data()[j] = 0.025f * (counter_uniform(seed, 2 * source, j) + 1.0f);
      g.data()[j] = counter_uniform(seed, 2 * source + 1, j);
    }
    char name[64];
    std::snprintf(name, sizeof name, "frame_%06u", i);
    const std::string act = std::string(name) + "_act.atnt";
    const std::string grad = std::string(name) + "_grad.atnt";
    write_tensor(l, dir / act);
    write_tensor(g, dir / grad);

    const double t = 2.0 * i;
    manifest.frames.push_back({i, t, act, grad});

    const double theta = 2.0 * std::numbers::pi * source / distinct;
    TrajectoryPose p;
    p.timestamp = t;
    p.translation = Eigen::Vector3d(3.0 * std::cos(theta), 3.0 * std::sin(theta), 0.0);
    p.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()));
    gt.push_back(p);

    TrajectoryPose e = p;
    e.translation = Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitZ()) * p.translation +
                    Eigen::Vector3d(0.5, -0.2, 0.1) +
                    0.02 * Eigen::Vector3d(counter_uniform(seed, 1u << 20, 3 * i),
                                           counter_uniform(seed, 1u << 20, 3 * i + 1),
                                           counter_uniform(seed, 1u << 20, 3 * i + 2));
    est.push_back(e);
  }

  SyntheticSequence out;
  out.manifest = dir / "manifest.json";
  out.ground_truth = dir / "groundtruth.txt";
  out.estimate = dir / "estimate.txt";
  out.frames = frames;
  out.revisits = revisits;
  write_manifest(manifest, out.manifest);
  write_trajectory(gt, out.ground_truth);
  write_trajectory(est, out.estimate);
  return out;
}

}  // namespace attnslam::cli
