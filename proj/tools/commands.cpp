#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "attnslam/association.hpp"
#include "attnslam/descriptor_io.hpp"
#include "attnslam/encoder.hpp"
#include "attnslam/error.hpp"
#include "attnslam/fusion.hpp"
#include "attnslam/manifest.hpp"
#include "attnslam/tensor_io.hpp"
#include "attnslam/trajectory.hpp"
#include "fixture.hpp"

namespace attnslam::cli {
namespace {

struct EncodeOptions {
  std::string manifest;
  std::string strategy = "baseline";
  std::uint64_t seed = 0;
  std::string out;
};

struct AssocOptions {
  std::string descriptors;
  std::string out;
  AssociationConfig assoc;
  IndexParams index;
  std::string gt;
  double radius = 1.0;
  double angle = 30.0;
  double max_diff = 0.02;
};

struct AteOptions {
  std::string est;
  std::string gt;
  bool no_align = false;
  double max_diff = 0.02;
  std::string csv;
};

struct SynthOptions {
  std::string out;
  std::uint32_t frames = 20;
  std::uint32_t revisits = 5;
  std::uint64_t seed = 7;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_encode(const EncodeOptions& opt, std::ostream& out, std::ostream& err) {
  const auto strategy = parse_fusion_strategy(opt.strategy);
  if (!strategy) {
    err << "encode: unknown strategy '" << opt.strategy << "'\n";
    return kExitUsage;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const SequenceManifest manifest = read_manifest(opt.manifest);

  EncoderConfig cfg;
  cfg.seed = opt.seed;
  const RandomRnnWeights weights = make_weights(cfg);

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(manifest.frames.size());
  std::vector<Descriptor> descriptors(manifest.frames.size());
  std::vector<std::string> failures(manifest.frames.size());
  std::vector<TensorDims> dims(manifest.frames.size());

  // Frames are independent; errors are collected and reported in frame order.
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const FrameRecord& rec = manifest.frames[i];
    try {
      const Tensor l = read_tensor(rec.activation_path);
      const Tensor g = read_tensor(rec.gradient_path);
      dims[i] = l.dims();
      descriptors[i] = {rec.frame_id, rec.timestamp, encode(fuse(l, g, *strategy), weights)};
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i].empty()) {
      throw ValidationError("frame " + std::to_string(manifest.frames[i].frame_id) + ": " + failures[i]);
    }
    if (!(dims[i] == dims.front())) {
      throw ValidationError("frame " + std::to_string(manifest.frames[i].frame_id) +
                            ": tensor dims differ from the first frame");
    }
  }

  write_descriptor_set(descriptors, opt.out);
  err << "encoded " << descriptors.size() << " frames of '" << manifest.sequence_name << "' with "
      << to_string(*strategy) << " in " << std::fixed << std::setprecision(3) << seconds_since(t0)
      << " s\n";
  out << "descriptors=" << descriptors.size() << " length=" << cfg.descriptor_length() << " out=" << opt.out
      << '\n';
  return kExitOk;
}

std::optional<TrajectoryPose> nearest_pose(const std::vector<TrajectoryPose>& gt, double t, double max_diff) {
  auto it = std::lower_bound(gt.begin(), gt.end(), t,
                             [](const TrajectoryPose& p, double v) { return p.timestamp < v; });
  std::optional<TrajectoryPose> best;
  double best_gap = max_diff;
  for (auto cand : {it, it == gt.begin() ? gt.end() : std::prev(it)}) {
    if (cand == gt.end()) continue;
    const double gap = std::abs(cand->timestamp - t);
    if (gap <= best_gap) {
      best_gap = gap;
      best = *cand;
    }
  }
  return best;
}

int cmd_assoc(const AssocOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<Descriptor> set = read_descriptor_set(opt.descriptors);
  if (set.empty()) throw ValidationError("assoc: descriptor set is empty");
  std::stable_sort(set.begin(), set.end(),
                   [](const Descriptor& a, const Descriptor& b) { return a.timestamp < b.timestamp; });

  std::vector<TrajectoryPose> gt;
  if (!opt.gt.empty()) gt = parse_trajectory(opt.gt);

  FrameAssociator associator(opt.assoc, opt.index);
  std::vector<CandidateMatch> matches;
  for (Descriptor& d : set) {
    Keyframe kf{d.frame_id, d.timestamp, std::move(d.values), std::nullopt};
    if (!opt.gt.empty()) {
      kf.gt_pose = nearest_pose(gt, kf.timestamp, opt.max_diff);
      if (!kf.gt_pose) {
        throw ValidationError("assoc: no ground-truth pose within " + std::to_string(opt.max_diff) +
                              " s of frame " + std::to_string(kf.frame_id));
      }
    }
    const auto found = associator.process(std::move(kf));
    matches.insert(matches.end(), found.begin(), found.end());
  }

  std::vector<bool> tp_flags;
  std::optional<RetrievalReport> report;
  if (!opt.gt.empty()) {
    report = evaluate_retrieval(associator.store(), matches,
                                {opt.radius, opt.angle, opt.assoc.temporal_exclusion_window});
    tp_flags = report->tp_flags;
  }

  std::ofstream csv(opt.out, std::ios::trunc);
  if (!csv) throw IoError("cannot open for writing: " + opt.out);
  write_match_csv(csv, matches, tp_flags);
  csv.flush();
  if (!csv) throw IoError("failed writing " + opt.out);

  const auto accepted = std::count_if(matches.begin(), matches.end(),
                                      [](const CandidateMatch& m) { return m.accepted; });
  out << "frames=" << set.size() << " candidates=" << matches.size() << " accepted=" << accepted << '\n';
  if (report) {
    char line[256];
    std::snprintf(line, sizeof line,
                  "precision=%.6f recall=%.6f true_positives=%zu queries_with_positive=%zu "
                  "queries_recalled=%zu precision_degenerate=%d recall_degenerate=%d",
                  report->precision, report->recall, report->true_positives, report->queries_with_positive,
                  report->queries_recalled, report->precision_degenerate ? 1 : 0,
                  report->recall_degenerate ? 1 : 0);
    out << line << '\n';
  }
  (void)err;
  return kExitOk;
}

int cmd_ate(const AteOptions& opt, std::ostream& out, std::ostream&) {
  const auto est = parse_trajectory(opt.est);
  const auto gt = parse_trajectory(opt.gt);
  const auto pairs = associate(est, gt, opt.max_diff);
  const AteResult result = absolute_trajectory_error(pairs, !opt.no_align);

  char line[128];
  std::snprintf(line, sizeof line, "rmse_m=%.6f pairs=%zu", result.rmse, pairs.size());
  out << line << '\n';

  if (!opt.csv.empty()) {
    std::ofstream csv(opt.csv, std::ios::trunc);
    if (!csv) throw IoError("cannot open for writing: " + opt.csv);
    csv << "timestamp,est_x,est_y,est_z,gt_x,gt_y,gt_z,error_m\n";
    char row[256];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Eigen::Vector3d e = result.transform.apply(pairs[i].est.translation);
      const Eigen::Vector3d& g = pairs[i].gt.translation;
      std::snprintf(row, sizeof row, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", pairs[i].est.timestamp, e.x(),
                    e.y(), e.z(), g.x(), g.y(), g.z(), result.errors[i]);
      csv << row;
    }
    if (!csv) throw IoError("failed writing " + opt.csv);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-guided frame association toolkit"};
  app.require_subcommand(1);

  EncodeOptions enc;
  auto* encode = app.add_subcommand("encode", "Fuse and encode manifest frames into a descriptor set");
  encode->add_option("--manifest", enc.manifest, "Sequence manifest (JSON)")->required();
  encode->add_option("--strategy", enc.strategy, "baseline|dam|eam|gaf|ega")
      ->check(CLI::IsMember({"baseline", "dam", "eam", "gaf", "ega"}));
  encode->add_option("--seed", enc.seed, "Random network seed");
  encode->add_option("--out", enc.out, "Output descriptor set (ATDS)")->required();

  AssocOptions as;
  auto* assoc = app.add_subcommand("assoc", "Stream descriptors through loop-closure association");
  assoc->add_option("--descriptors", as.descriptors, "Descriptor set (ATDS)")->required();
  assoc->add_option("--window", as.assoc.temporal_exclusion_window, "Temporal exclusion window, seconds");
  assoc->add_option("--knn", as.assoc.knn, "Candidates per query");
  assoc->add_option("--alpha", as.assoc.alpha, "Adaptive threshold multiplier");
  assoc->add_option("--warmup", as.assoc.warmup, "Accepted matches before mean+alpha*sigma gating");
  auto* gt_opt = assoc->add_option("--gt", as.gt, "Ground-truth trajectory (TUM) for the retrieval report");
  assoc->add_option("--radius", as.radius, "Positive-pair radius, meters")->needs(gt_opt);
  assoc->add_option("--angle", as.angle, "Positive-pair angle, degrees")->needs(gt_opt);
  assoc->add_option("--max-diff", as.max_diff, "Max timestamp gap to a ground-truth pose, seconds");
  assoc->add_option("--branching", as.index.branching, "Index branching factor");
  assoc->add_option("--leaf-size", as.index.max_leaf_size, "Index max leaf size");
  assoc->add_option("--iters", as.index.kmeans_iters, "Lloyd iterations per split");
  assoc->add_option("--checks", as.index.checks, "Leaf points scored per query");
  assoc->add_option("--seed", as.index.seed, "Index seed");
  assoc->add_option("--out", as.out, "Match log CSV")->required();

  AteOptions at;
  auto* ate = app.add_subcommand("ate", "Absolute trajectory error between two TUM trajectories");
  ate->add_option("--est", at.est, "Estimated trajectory")->required();
  ate->add_option("--gt", at.gt, "Ground-truth trajectory")->required();
  ate->add_flag("--no-align", at.no_align, "Skip rigid alignment");
  ate->add_option("--max-diff", at.max_diff, "Max timestamp gap for association, seconds");
  ate->add_option("--csv", at.csv, "Per-pair error CSV");

  SynthOptions sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic tensor sequence with planted revisits");
  synth->add_option("--out", sy.out, "Output directory")->required();
  synth->add_option("--frames", sy.frames, "Frame count");
  synth->add_option("--revisits", sy.revisits, "Trailing frames that revisit the first ones");
  synth->add_option("--seed", sy.seed, "Fixture seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*encode) return cmd_encode(enc, out, err);
    if (*assoc) {
      as.assoc.validate();
      as.index.validate();
      return cmd_assoc(as, out, err);
    }
    if (*ate) return cmd_ate(at, out, err);
    if (*synth) {
      const SyntheticSequence seq = write_synthetic_sequence(sy.out, sy.frames, sy.revisits, sy.seed);
      out << "frames=" << seq.frames << " revisits=" << seq.revisits << " manifest=" << seq.manifest.string()
          << " gt=" << seq.ground_truth.string() << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace attnslam::cli
