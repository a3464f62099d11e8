#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "attnslam/kmeans_index.hpp"
#include "attnslam/trajectory.hpp"

namespace attnslam {

struct Keyframe {
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;
  std::vector<float> descriptor;
  std::optional<TrajectoryPose> gt_pose;  // evaluation only
};

struct AssociationConfig {
  double temporal_exclusion_window = 30.0;  // seconds
  std::size_t knn = 5;
  double alpha = 1.0;
  std::size_t warmup = 10;

  /// Throws ValidationError unless window >= 0, knn >= 1, warmup >= 2.
  void validate() const;
};

struct CandidateMatch {
  std::uint64_t query_id = 0;
  std::uint64_t match_id = 0;
  double distance = 0.0;  // squared Euclidean
  bool accepted = false;
  double threshold = 0.0;  // threshold in force when the decision was made

  friend bool operator==(const CandidateMatch&, const CandidateMatch&) = default;
};

/// Running state for the adaptive gate.
struct ThresholdHistory {
  std::vector<double> accepted;  // distances of accepted matches
  std::vector<double> seen;      // every candidate distance so far
};

struct FilterDecision {
  bool accepted = false;
  double threshold = 0.0;
};

/// Before `warmup` accepted matches exist, the threshold is the median of
/// history.seen; afterwards it is mean + alpha * stddev (population) of
/// history.accepted. Accepts iff distance <= threshold. An empty `seen` set
/// yields threshold +inf.
FilterDecision adaptive_filter(const ThresholdHistory& history, double distance,
                               const AssociationConfig& cfg);

/// Final accept/reject on a thresholded candidate, e.g. geometric
/// verification by motion estimation. Receives (query_id, match_id).
using VerificationHook = std::function<bool(std::uint64_t, std::uint64_t)>;

/// Ordered keyframe registry backed by a KMeansIndex. Single writer, many
/// readers: queries take a shared lock, insertion an exclusive one.
class KeyframeStore {
 public:
  explicit KeyframeStore(IndexParams params = {});

  /// Throws ValidationError on a timestamp older than the last one or a
  /// descriptor length that differs from the store's.
  void insert(Keyframe kf);

  std::size_t size() const;
  const Keyframe& at(std::size_t position) const;
  std::span<const Keyframe> keyframes() const { return keyframes_; }

  /// Up to `knn` nearest keyframes whose timestamp differs from
  /// `timestamp` by at least `window`. Returns (store position, distance).
  std::vector<Match> nearest_outside_window(std::span<const float> descriptor,
                                            double timestamp, double window,
                                            std::size_t knn) const;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<Keyframe> keyframes_;
  KMeansIndex index_;
};

/// Loop-closure candidates for `current`. Every candidate distance is added
/// to history.seen before its decision; accepted ones (threshold and hook
/// both passing) go into history.accepted. An empty hook accepts all.
std::vector<CandidateMatch> query_candidates(const KeyframeStore& store, const Keyframe& current,
                                             const AssociationConfig& cfg,
                                             ThresholdHistory& history,
                                             const VerificationHook& verify = {});

/// Streams keyframes through query-then-insert so a frame never matches
/// itself.
class FrameAssociator {
 public:
  FrameAssociator(AssociationConfig cfg, IndexParams params, VerificationHook verify = {});

  std::vector<CandidateMatch> process(Keyframe kf);

  const KeyframeStore& store() const { return store_; }
  const ThresholdHistory& history() const { return history_; }

 private:
  AssociationConfig cfg_;
  VerificationHook verify_;
  KeyframeStore store_;
  ThresholdHistory history_;
};

struct PositiveCriterion {
  double radius_m = 1.0;
  double angle_deg = 30.0;
  double temporal_exclusion_window = 30.0;
};

struct QueryRecord {
  std::uint64_t query_id = 0;
  bool has_positive = false;  // an admissible true match existed in the store
  bool recalled = false;      // at least one accepted match was a true positive
  std::size_t accepted = 0;
  std::size_t true_positives = 0;
};

struct RetrievalReport {
  double precision = 1.0;
  double recall = 1.0;
  std::size_t accepted = 0;
  std::size_t true_positives = 0;
  std::size_t queries_with_positive = 0;
  std::size_t queries_recalled = 0;
  bool precision_degenerate = false;  // no accepted matches
  bool recall_degenerate = false;     // no query had an admissible positive
  PositiveCriterion criterion;
  std::vector<QueryRecord> queries;  // one per keyframe, store order
  std::vector<bool> tp_flags;        // parallel to the evaluated matches
};

/// Scores matches against ground-truth poses. Every keyframe of the store is
/// treated as a query made against the keyframes stored before it; a pair is
/// positive when it lies outside the temporal window and within both the
/// radius and the rotation angle. Throws ValidationError when a keyframe
/// lacks gt_pose or a match references an unknown frame.
RetrievalReport evaluate_retrieval(const KeyframeStore& store,
                                   std::span<const CandidateMatch> matches,
                                   const PositiveCriterion& criterion);

/// CSV header plus one row per match:
/// query_id,match_id,distance,threshold,accepted,tp_flag. tp_flag is empty
/// when `tp_flags` is empty.
void write_match_csv(std::ostream& out, std::span<const CandidateMatch> matches,
                     const std::vector<bool>& tp_flags);

}  // namespace attnslam
