#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace attnslam {

struct IndexParams {
  std::uint32_t branching = 32;
  std::uint32_t max_leaf_size = 64;
  std::uint32_t kmeans_iters = 11;
  std::uint32_t checks = 256;
  std::uint64_t seed = 0;

  /// Throws ValidationError unless branching >= 2, checks >= 1 and
  /// max_leaf_size >= 1.
  void validate() const;
};

struct Match {
  std::uint32_t id = 0;
  float distance = 0.0f;  // squared Euclidean

  friend bool operator==(const Match&, const Match&) = default;
};

struct SearchResult {
  std::vector<Match> matches;  // ascending distance, ties by id
  bool exhaustive = false;     // every indexed point was scored
};

/// Priority search k-means tree with an append buffer for online growth.
///
/// Points get consecutive ids in insertion order. Inserted points go to a
/// side buffer that every query scans linearly; once the buffer outgrows
/// max(256, tree size) the whole tree is rebuilt with a derived seed. A
/// rebuild is assembled off to the side and swapped in whole.
///
/// Searching a const index is thread-safe; insert() needs exclusive access.
class KMeansIndex {
 public:
  struct Node {
    std::vector<float> centroid;
    std::vector<Node> children;        // empty for leaves
    std::vector<std::uint32_t> points; // leaves only
    bool is_leaf() const { return children.empty(); }
  };

  explicit KMeansIndex(IndexParams params = {});

  /// Batch construction. Throws ValidationError on mixed lengths.
  static KMeansIndex build(const std::vector<std::vector<float>>& points,
                           IndexParams params = {});

  /// Returns the new point's id. Throws ValidationError on length mismatch.
  std::uint32_t insert(std::span<const float> point);

  /// Best-bin-first query. Scoring stops once `checks` tree points have been
  /// scored or no branch is left; the buffer is always scanned.
  SearchResult search(std::span<const float> query, std::size_t knn,
                      std::size_t checks) const;
  SearchResult search(std::span<const float> query, std::size_t knn) const {
    return search(query, knn, params_.checks);
  }
  /// Runs independent queries in parallel.
  std::vector<SearchResult> search_batch(const std::vector<std::vector<float>>& queries,
                                         std::size_t knn, std::size_t checks) const;

  std::size_t size() const { return dim_ == 0 ? 0 : points_.size() / dim_; }
  std::size_t tree_size() const { return tree_size_; }
  std::size_t buffer_size() const { return size() - tree_size_; }
  std::size_t dim() const { return dim_; }
  const IndexParams& params() const { return params_; }
  std::uint64_t rebuild_count() const { return rebuilds_; }
  std::span<const float> point(std::uint32_t id) const;
  /// Null when the tree is empty.
  const Node* root() const { return root_.get(); }

  /// Snapshot: "ATIX" | u32 version | params | u32 dim | u64 count | floats.
  /// Only the points are stored; load() rebuilds the tree.
  void save(const std::filesystem::path& path) const;
  static KMeansIndex load(const std::filesystem::path& path);

 private:
  void rebuild();

  IndexParams params_;
  std::size_t dim_ = 0;
  std::vector<float> points_;  // row-major, size() x dim_
  std::unique_ptr<Node> root_;
  std::size_t tree_size_ = 0;
  std::uint64_t rebuilds_ = 0;
};

inline constexpr char kIndexMagic[4] = {'A', 'T', 'I', 'X'};
inline constexpr std::uint32_t kIndexFormatVersion = 1;

}  // namespace attnslam
