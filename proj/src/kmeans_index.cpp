#include "attnslam/kmeans_index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>
#include <string>
#include <tuple>

#include "attnslam/distance.hpp"
#include "attnslam/error.hpp"
#include "byte_io.hpp"
#include "splitmix.hpp"

namespace attnslam {
namespace {

using Node = KMeansIndex::Node;

std::uint64_t build_seed(std::uint64_t base, std::uint64_t generation) {
  return generation == 0 ? base : detail::splitmix64_mix(base + generation * detail::kGoldenGamma);
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const float> points, std::size_t dim, const IndexParams& params)
      : points_(points), dim_(dim), params_(params) {}

  std::unique_ptr<Node> build(std::size_t n, std::uint64_t seed) const {
    auto root = std::make_unique<Node>();
    std::vector<std::uint32_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::uint32_t>(i);
    root->centroid = mean(ids);
    split(*root, std::move(ids), seed);
    return root;
  }

 private:
  std::span<const float> point(std::uint32_t id) const { return points_.subspan(id * dim_, dim_); }

  std::vector<float> mean(const std::vector<std::uint32_t>& ids) const {
    std::vector<double> acc(dim_, 0.0);
    for (std::uint32_t id : ids) {
      const auto p = point(id);
      for (std::size_t j = 0; j < dim_; ++j) acc[j] += p[j];
    }
    std::vector<float> out(dim_);
    const double inv = ids.empty() ? 0.0 : 1.0 / static_cast<double>(ids.size());
    for (std::size_t j = 0; j < dim_; ++j) out[j] = static_cast<float>(acc[j] * inv);
    return out;
  }

  // Nearest centroid per point, lowest index on ties. Returns whether any
  // assignment changed.
  bool assign(const std::vector<std::uint32_t>& ids, const std::vector<float>& centroids,
              std::size_t k, std::vector<std::uint32_t>& labels) const {
    const std::span<const float> cs(centroids);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ids.size());
    bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto p = point(ids[i]);
      std::uint32_t best = 0;
      float best_d = std::numeric_limits<float>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const float d = squared_distance(p, cs.subspan(c * dim_, dim_));
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::uint32_t>(c);
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    return changed;
  }

  // Lloyd update; an empty cluster keeps its previous centroid.
  void update(const std::vector<std::uint32_t>& ids, const std::vector<std::uint32_t>& labels,
              std::vector<float>& centroids, std::size_t k) const {
    std::vector<double> sums(k * dim_, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto p = point(ids[i]);
      double* s = sums.data() + labels[i] * dim_;
      for (std::size_t j = 0; j < dim_; ++j) s[j] += p[j];
      ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[c]);
      for (std::size_t j = 0; j < dim_; ++j) {
        centroids[c * dim_ + j] = static_cast<float>(sums[c * dim_ + j] * inv);
      }
    }
  }

  void split(Node& node, std::vector<std::uint32_t> ids, std::uint64_t seed) const {
    if (ids.size() <= params_.max_leaf_size) {
      node.points = std::move(ids);
      return;
    }
    detail::SplitMix64 rng(seed);
    const std::size_t n = ids.size();
    const std::size_t k = std::min<std::size_t>(params_.branching, n);

    // Seed centroids with k distinct random members (partial Fisher-Yates).
    std::vector<std::uint32_t> pick(ids);
    std::vector<float> centroids(k * dim_);
    for (std::size_t c = 0; c < k; ++c) {
      std::swap(pick[c], pick[c + rng.below(n - c)]);
      const auto p = point(pick[c]);
      std::copy(p.begin(), p.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim_));
    }

    std::vector<std::uint32_t> labels(n, std::numeric_limits<std::uint32_t>::max());
    bool changed = assign(ids, centroids, k, labels);
    for (std::uint32_t it = 0; it < params_.kmeans_iters && changed; ++it) {
      update(ids, labels, centroids, k);
      changed = assign(ids, centroids, k, labels);
    }

    std::vector<std::vector<std::uint32_t>> groups(k);
    for (std::size_t i = 0; i < n; ++i) groups[labels[i]].push_back(ids[i]);
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    if (groups.size() <= 1) {
      node.points = std::move(ids);
      return;
    }

    node.children.resize(groups.size());
    for (std::size_t c = 0; c < groups.size(); ++c) {
      Node& child = node.children[c];
      child.centroid = mean(groups[c]);
      split(child, std::move(groups[c]), rng.next());
    }
  }

  std::span<const float> points_;
  std::size_t dim_;
  const IndexParams& params_;
};

bool match_less(const Match& a, const Match& b) {
  return std::tie(a.distance, a.id) < std::tie(b.distance, b.id);
}

}  // namespace

void IndexParams::validate() const {
  if (branching < 2) throw ValidationError("index: branching must be >= 2");
  if (checks < 1) throw ValidationError("index: checks must be >= 1");
  if (max_leaf_size < 1) throw ValidationError("index: max_leaf_size must be >= 1");
}

KMeansIndex::KMeansIndex(IndexParams params) : params_(params) { params_.validate(); }

KMeansIndex KMeansIndex::build(const std::vector<std::vector<float>>& points, IndexParams params) {
  KMeansIndex index(params);
  if (points.empty()) return index;
  const std::size_t dim = points.front().size();
  if (dim == 0) throw ValidationError("index: descriptors must be non-empty");
  index.points_.reserve(points.size() * dim);
  for (const auto& p : points) {
    if (p.size() != dim) {
      throw ValidationError("index: inconsistent descriptor lengths (" + std::to_string(dim) +
                            " vs " + std::to_string(p.size()) + ")");
    }
    index.points_.insert(index.points_.end(), p.begin(), p.end());
  }
  index.dim_ = dim;
  index.rebuild();
  return index;
}

void KMeansIndex::rebuild() {
  const std::size_t n = size();
  TreeBuilder builder(points_, dim_, params_);
  auto root = builder.build(n, build_seed(params_.seed, rebuilds_));
  root_ = std::move(root);
  tree_size_ = n;
  ++rebuilds_;
}

std::uint32_t KMeansIndex::insert(std::span<const float> point) {
  if (dim_ == 0) {
    if (point.empty()) throw ValidationError("index: descriptors must be non-empty");
    dim_ = point.size();
  } else if (point.size() != dim_) {
    throw ValidationError("index: dimension mismatch on insert (" + std::to_string(point.size()) +
                          " vs " + std::to_string(dim_) + ")");
  }
  if (size() >= std::numeric_limits<std::uint32_t>::max()) throw ValidationError("index full");
  const auto id = static_cast<std::uint32_t>(size());
  points_.insert(points_.end(), point.begin(), point.end());
  if (buffer_size() > std::max<std::size_t>(256, tree_size_)) rebuild();
  return id;
}

std::span<const float> KMeansIndex::point(std::uint32_t id) const {
  return std::span<const float>(points_).subspan(std::size_t{id} * dim_, dim_);
}

SearchResult KMeansIndex::search(std::span<const float> query, std::size_t knn,
                                 std::size_t checks) const {
  SearchResult result;
  if (size() == 0 || knn == 0) {
    result.exhaustive = true;
    return result;
  }
  if (query.size() != dim_) {
    throw ValidationError("index: query dimension " + std::to_string(query.size()) +
                          " does not match " + std::to_string(dim_));
  }

  std::vector<Match> scored;
  std::size_t scored_tree = 0;

  if (root_) {
    // (centroid distance, push order) keeps pops deterministic on ties.
    using Branch = std::tuple<float, std::uint64_t, const Node*>;
    std::priority_queue<Branch, std::vector<Branch>, std::greater<>> heap;
    std::uint64_t pushed = 0;

    auto descend = [&](const Node* node) {
      while (!node->is_leaf()) {
        std::size_t best = 0;
        float best_d = std::numeric_limits<float>::infinity();
        std::vector<float> d(node->children.size());
        for (std::size_t c = 0; c < node->children.size(); ++c) {
          d[c] = squared_distance(query, node->children[c].centroid);
          if (d[c] < best_d) {
            best_d = d[c];
            best = c;
          }
        }
        for (std::size_t c = 0; c < node->children.size(); ++c) {
          if (c != best) heap.emplace(d[c], pushed++, &node->children[c]);
        }
        node = &node->children[best];
      }
      for (std::uint32_t id : node->points) {
        scored.push_back({id, squared_distance(query, point(id))});
      }
      scored_tree += node->points.size();
    };

    descend(root_.get());
    while (scored_tree < checks && !heap.empty()) {
      const Node* next = std::get<2>(heap.top());
      heap.pop();
      descend(next);
    }
  }
  result.exhaustive = scored_tree == tree_size_;

  for (std::size_t id = tree_size_; id < size(); ++id) {
    const auto pid = static_cast<std::uint32_t>(id);
    scored.push_back({pid, squared_distance(query, point(pid))});
  }

  const std::size_t keep = std::min(knn, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    match_less);
  scored.resize(keep);
  result.matches = std::move(scored);
  return result;
}

std::vector<SearchResult> KMeansIndex::search_batch(const std::vector<std::vector<float>>& queries,
                                                    std::size_t knn, std::size_t checks) const {
  std::vector<SearchResult> out(queries.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(queries.size());
  // Exceptions must not escape the parallel region; validate first.
  for (const auto& q : queries) {
    if (size() != 0 && q.size() != dim_) {
      throw ValidationError("index: query dimension " + std::to_string(q.size()) +
                            " does not match " + std::to_string(dim_));
    }
  }
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = search(queries[i], knn, checks);
  return out;
}

void KMeansIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  detail::ByteWriter w(out);
  w.put_bytes(kIndexMagic);
  w.put<std::uint32_t>(kIndexFormatVersion);
  w.put<std::uint32_t>(params_.branching);
  w.put<std::uint32_t>(params_.max_leaf_size);
  w.put<std::uint32_t>(params_.kmeans_iters);
  w.put<std::uint32_t>(params_.checks);
  w.put<std::uint64_t>(params_.seed);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim_));
  w.put<std::uint64_t>(size());
  w.put_floats(points_);
  out.flush();
  w.check(path.string().c_str());
}

KMeansIndex KMeansIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index snapshot: " + path.string());
  detail::ByteReader r(in, "index snapshot");
  char magic[4];
  r.get_bytes(magic);
  if (std::memcmp(magic, kIndexMagic, 4) != 0) throw FormatError(path.string() + ": bad index magic");
  if (const auto v = r.get<std::uint32_t>(); v != kIndexFormatVersion) {
    throw FormatError(path.string() + ": unsupported index version " + std::to_string(v));
  }
  IndexParams params;
  params.branching = r.get<std::uint32_t>();
  params.max_leaf_size = r.get<std::uint32_t>();
  params.kmeans_iters = r.get<std::uint32_t>();
  params.checks = r.get<std::uint32_t>();
  params.seed = r.get<std::uint64_t>();
  const auto dim = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  const auto floats = static_cast<std::streamoff>(dim) * static_cast<std::streamoff>(count);
  if (const auto left = r.remaining(); left >= 0 && left != floats * 4) {
    throw FormatError(path.string() + ": index payload size mismatch");
  }
  if (count > 0 && dim == 0) throw FormatError(path.string() + ": zero dimension with points");

  KMeansIndex index(params);
  index.points_.resize(static_cast<std::size_t>(floats));
  r.get_floats(index.points_);
  index.dim_ = dim;
  if (count > 0) index.rebuild();
  return index;
}

}  // namespace attnslam
