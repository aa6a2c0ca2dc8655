#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "srkde/dataset.hpp"
#include "srkde/special_math.hpp"

namespace srkde {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Exact k-nearest-neighbor index over a Dataset.  Median-split kd-tree
/// on the widest-spread coordinate; all distance ties are broken by
/// ascending point index, so query results are fully deterministic and
/// match a brute-force scan bit for bit.
class KdTreeIndex {
 public:
  static constexpr std::size_t kLeafSize = 16;
  static constexpr std::size_t kNoExclude =
      std::numeric_limits<std::size_t>::max();

  explicit KdTreeIndex(std::shared_ptr<const Dataset> data)
      : data_(std::move(data)) {
    if (!data_) throw std::invalid_argument("index requires a dataset");
    order_.resize(data_->size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    nodes_.reserve(2 * (data_->size() / kLeafSize + 1));
    root_ = build(0, static_cast<std::uint32_t>(order_.size()));
  }

  const Dataset& data() const { return *data_; }
  std::size_t size() const { return data_->size(); }
  std::size_t dimension() const { return data_->dimension(); }
  std::size_t node_count() const { return nodes_.size(); }

  /// The k nearest points to `query`, ascending by (distance, index).
  /// Pass a point's own index as `exclude` to search its neighbors.
  std::vector<Neighbor> k_nearest(std::span<const double> query,
                                  std::size_t k,
                                  std::size_t exclude = kNoExclude) const {
    check_same_dimension(dimension(), query.size(), "query point");
    const std::size_t available = size() - (exclude < size() ? 1 : 0);
    if (k < 1 || k > available) {
      throw std::invalid_argument("k must be in [1, " +
                                  std::to_string(available) + "], got " +
                                  std::to_string(k));
    }
    std::vector<Entry> heap;
    heap.reserve(k);
    search(root_, query, k, exclude, heap);
    std::sort(heap.begin(), heap.end());
    std::vector<Neighbor> result(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i) {
      result[i] = {heap[i].second, std::sqrt(heap[i].first)};
    }
    return result;
  }

  /// Distance from every point to its k-th nearest other point.
  std::vector<double> kth_distances(std::size_t k) const {
    if (k < 1 || k + 1 > size()) {
      throw std::invalid_argument(
          "k must be in [1, n-1] for self-excluding neighbor radii");
    }
    std::vector<double> radii(size());
    for (std::size_t i = 0; i < size(); ++i) {
      radii[i] = k_nearest(data_->point(i), k, i).back().distance;
    }
    return radii;
  }

 private:
  using Entry = std::pair<double, std::uint32_t>;  // (squared dist, index)

  static constexpr std::uint32_t kLeafMarker =
      std::numeric_limits<std::uint32_t>::max();

  struct Node {
    double split = 0.0;
    std::uint32_t dim = kLeafMarker;  // kLeafMarker for leaves
    std::uint32_t a = 0;  // internal: left child; leaf: begin in order_
    std::uint32_t b = 0;  // internal: right child; leaf: end in order_
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
    const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
      nodes_[id] = Node{0.0, kLeafMarker, begin, end};
      return id;
    }
    const std::size_t m = dimension();
    std::size_t split_dim = 0;
    double widest = -1.0;
    for (std::size_t d = 0; d < m; ++d) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::uint32_t i = begin; i < end; ++i) {
        const double v = data_->point(order_[i])[d];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        split_dim = d;
      }
    }
    const std::uint32_t mid = begin + (end - begin) / 2;
    // Total order on (coordinate, index) keeps the partition unique even
    // with duplicate points.
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end,
                     [&](std::uint32_t x, std::uint32_t y) {
                       const double vx = data_->point(x)[split_dim];
                       const double vy = data_->point(y)[split_dim];
                       return vx < vy || (vx == vy && x < y);
                     });
    const double split_value = data_->point(order_[mid])[split_dim];
    // Children are built before the node is written: build() may grow
    // nodes_ and invalidate references into it.
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    nodes_[id] = Node{split_value, static_cast<std::uint32_t>(split_dim),
                      left, right};
    return id;
  }

  void consider(Entry candidate, std::size_t k,
                std::vector<Entry>& heap) const {
    if (heap.size() < k) {
      heap.push_back(candidate);
      std::push_heap(heap.begin(), heap.end());
      return;
    }
    if (candidate < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = candidate;
      std::push_heap(heap.begin(), heap.end());
    }
  }

  void search(std::uint32_t id, std::span<const double> query, std::size_t k,
              std::size_t exclude, std::vector<Entry>& heap) const {
    const Node& node = nodes_[id];
    if (node.dim == kLeafMarker) {
      for (std::uint32_t i = node.a; i < node.b; ++i) {
        const std::uint32_t idx = order_[i];
        if (idx == exclude) continue;
        consider({squared_distance(query, data_->point(idx)), idx}, k, heap);
      }
      return;
    }
    const double diff = query[node.dim] - node.split;
    const std::uint32_t near = diff < 0.0 ? node.a : node.b;
    const std::uint32_t far = diff < 0.0 ? node.b : node.a;
    search(near, query, k, exclude, heap);
    // The far side can still hold an equally distant, lower-index point
    // when diff * diff equals the current worst, so prune with <=.
    if (heap.size() < k || diff * diff <= heap.front().first) {
      search(far, query, k, exclude, heap);
    }
  }

  std::shared_ptr<const Dataset> data_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

inline KdTreeIndex build_index(std::shared_ptr<const Dataset> data) {
  return KdTreeIndex(std::move(data));
}

inline KdTreeIndex build_index(Dataset data) {
  return KdTreeIndex(std::make_shared<const Dataset>(std::move(data)));
}

}  // namespace srkde
