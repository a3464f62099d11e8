#include "attnslam/association.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <unordered_map>

#include "attnslam/error.hpp"

namespace attnslam {
namespace {

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

void AssociationConfig::validate() const {
  if (!(temporal_exclusion_window >= 0.0)) throw ValidationError("association: window must be >= 0");
  if (knn < 1) throw ValidationError("association: knn must be >= 1");
  if (warmup < 2) throw ValidationError("association: warmup must be >= 2");
  if (!std::isfinite(alpha)) throw ValidationError("association: alpha must be finite");
}

FilterDecision adaptive_filter(const ThresholdHistory& history, double distance,
                               const AssociationConfig& cfg) {
  double threshold;
  if (history.accepted.size() < cfg.warmup) {
    threshold = history.seen.empty() ? std::numeric_limits<double>::infinity() : median(history.seen);
  } else {
    const double n = static_cast<double>(history.accepted.size());
    double mean = 0.0;
    for (double d : history.accepted) mean += d;
    mean /= n;
    double var = 0.0;
    for (double d : history.accepted) var += (d - mean) * (d - mean);
    threshold = mean + cfg.alpha * std::sqrt(var / n);
  }
  return {distance <= threshold, threshold};
}

KeyframeStore::KeyframeStore(IndexParams params) : index_(params) {}

void KeyframeStore::insert(Keyframe kf) {
  std::unique_lock lock(mutex_);
  if (!std::isfinite(kf.timestamp)) throw ValidationError("keyframe: non-finite timestamp");
  if (!keyframes_.empty()) {
    if (kf.timestamp < keyframes_.back().timestamp) {
      throw ValidationError("keyframe " + std::to_string(kf.frame_id) +
                            ": timestamp older than the previous keyframe");
    }
    if (kf.descriptor.size() != keyframes_.front().descriptor.size()) {
      throw ValidationError("keyframe " + std::to_string(kf.frame_id) + ": descriptor length " +
                            std::to_string(kf.descriptor.size()) + " differs from store's " +
                            std::to_string(keyframes_.front().descriptor.size()));
    }
  }
  index_.insert(kf.descriptor);
  keyframes_.push_back(std::move(kf));
}

std::size_t KeyframeStore::size() const {
  std::shared_lock lock(mutex_);
  return keyframes_.size();
}

const Keyframe& KeyframeStore::at(std::size_t position) const {
  std::shared_lock lock(mutex_);
  return keyframes_.at(position);
}

std::vector<Match> KeyframeStore::nearest_outside_window(std::span<const float> descriptor,
                                                         double timestamp, double window,
                                                         std::size_t knn) const {
  std::shared_lock lock(mutex_);
  const auto admissible = [&](std::uint32_t pos) {
    return std::abs(keyframes_[pos].timestamp - timestamp) >= window;
  };
  std::size_t eligible = 0;
  for (const Keyframe& kf : keyframes_) {
    if (std::abs(kf.timestamp - timestamp) >= window) ++eligible;
  }
  const std::size_t want = std::min(knn, eligible);
  if (want == 0) return {};

  // Over-fetch by the excluded count; widen to a full scan if the
  // approximate search still comes up short.
  const std::size_t excluded = keyframes_.size() - eligible;
  std::vector<Match> out;
  for (const std::size_t checks : {std::size_t{index_.params().checks}, keyframes_.size()}) {
    out.clear();
    const SearchResult r = index_.search(descriptor, want + excluded, checks);
    for (const Match& m : r.matches) {
      if (admissible(m.id)) out.push_back(m);
      if (out.size() == want) break;
    }
    if (out.size() == want || r.exhaustive) break;
  }
  return out;
}

std::vector<CandidateMatch> query_candidates(const KeyframeStore& store, const Keyframe& current,
                                             const AssociationConfig& cfg, ThresholdHistory& history,
                                             const VerificationHook& verify) {
  std::vector<CandidateMatch> out;
  if (store.size() == 0) return out;
  const auto nearest =
      store.nearest_outside_window(current.descriptor, current.timestamp, cfg.temporal_exclusion_window, cfg.knn);
  for (const Match& m : nearest) {
    CandidateMatch c;
    c.query_id = current.frame_id;
    c.match_id = store.at(m.id).frame_id;
    c.distance = m.distance;
    history.seen.push_back(c.distance);
    const FilterDecision decision = adaptive_filter(history, c.distance, cfg);
    c.threshold = decision.threshold;
    c.accepted = decision.accepted && (!verify || verify(c.query_id, c.match_id));
    if (c.accepted) history.accepted.push_back(c.distance);
    out.push_back(c);
  }
  return out;
}

FrameAssociator::FrameAssociator(AssociationConfig cfg, IndexParams params, VerificationHook verify)
    : cfg_(cfg), verify_(std::move(verify)), store_(params) {
  cfg_.validate();
}

std::vector<CandidateMatch> FrameAssociator::process(Keyframe kf) {
  auto matches = query_candidates(store_, kf, cfg_, history_, verify_);
  store_.insert(std::move(kf));
  return matches;
}

RetrievalReport evaluate_retrieval(const KeyframeStore& store, std::span<const CandidateMatch> matches,
                                   const PositiveCriterion& criterion) {
  const auto frames = store.keyframes();
  std::unordered_map<std::uint64_t, std::size_t> position;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!frames[i].gt_pose) {
      throw ValidationError("evaluate_retrieval: keyframe " + std::to_string(frames[i].frame_id) +
                            " has no ground-truth pose");
    }
    position.emplace(frames[i].frame_id, i);
  }

  const auto is_positive = [&](const Keyframe& a, const Keyframe& b) {
    const TrajectoryPose& pa = *a.gt_pose;
    const TrajectoryPose& pb = *b.gt_pose;
    return std::abs(a.timestamp - b.timestamp) >= criterion.temporal_exclusion_window &&
           (pa.translation - pb.translation).norm() <= criterion.radius_m &&
           rotation_angle_deg(pa.rotation, pb.rotation) <= criterion.angle_deg;
  };

  RetrievalReport report;
  report.criterion = criterion;
  report.queries.resize(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    QueryRecord& q = report.queries[i];
    q.query_id = frames[i].frame_id;
    for (std::size_t j = 0; j < i && !q.has_positive; ++j) q.has_positive = is_positive(frames[i], frames[j]);
  }

  report.tp_flags.reserve(matches.size());
  for (const CandidateMatch& m : matches) {
    const auto qi = position.find(m.query_id);
    const auto mi = position.find(m.match_id);
    if (qi == position.end() || mi == position.end()) {
      throw ValidationError("evaluate_retrieval: match " + std::to_string(m.query_id) + "->" +
                            std::to_string(m.match_id) + " references an unknown keyframe");
    }
    const bool tp = m.accepted && is_positive(frames[qi->second], frames[mi->second]);
    report.tp_flags.push_back(tp);
    if (!m.accepted) continue;
    QueryRecord& q = report.queries[qi->second];
    ++q.accepted;
    ++report.accepted;
    if (tp) {
      ++q.true_positives;
      ++report.true_positives;
      q.recalled = true;
    }
  }

  for (const QueryRecord& q : report.queries) {
    if (!q.has_positive) continue;
    ++report.queries_with_positive;
    if (q.recalled) ++report.queries_recalled;
  }
  report.precision_degenerate = report.accepted == 0;
  report.precision = report.precision_degenerate
                         ? 1.0
                         : static_cast<double>(report.true_positives) / static_cast<double>(report.accepted);
  report.recall_degenerate = report.queries_with_positive == 0;
  report.recall = report.recall_degenerate ? 1.0
                                           : static_cast<double>(report.queries_recalled) /
                                                 static_cast<double>(report.queries_with_positive);
  return report;
}

void write_match_csv(std::ostream& out, std::span<const CandidateMatch> matches,
                     const std::vector<bool>& tp_flags) {
  out << "query_id,match_id,distance,threshold,accepted,tp_flag\n";
  char buf[64];
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const CandidateMatch& m = matches[i];
    out << m.query_id << ',' << m.match_id << ',';
    std::snprintf(buf, sizeof buf, "%.9g", m.distance);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.9g", m.threshold);
    out << buf << ',' << (m.accepted ? 1 : 0) << ',';
    if (!tp_flags.empty()) out << (tp_flags[i] ? 1 : 0);
    out << '\n';
  }
}

}  // namespace attnslam
