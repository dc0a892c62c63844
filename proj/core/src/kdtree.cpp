#include "sgev/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgev/errors.hpp"

namespace sgev {

KdTreeMax::KdTreeMax(const Eigen::MatrixXd& points, int leaf_size)
    : points_(points), leaf_size_(std::max(1, leaf_size)) {
  if (points_.rows() == 0 || points_.cols() == 0) {
    throw DimensionError("KdTreeMax requires a non-empty point set");
  }
  order_.resize(static_cast<std::size_t>(points_.rows()));
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  nodes_.reserve(static_cast<std::size_t>(2 * points_.rows() / leaf_size_ + 2));
  build(0, points_.rows());
}

int KdTreeMax::build(Eigen::Index begin, Eigen::Index end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{});
  nodes_[static_cast<std::size_t>(id)].begin = begin;
  nodes_[static_cast<std::size_t>(id)].end = end;
  if (end - begin <= leaf_size_) return id;

  // Split the widest dimension at its median.
  int axis = 0;
  double widest = -1.0;
  for (Eigen::Index d = 0; d < points_.cols(); ++d) {
    double lo = points_(order_[static_cast<std::size_t>(begin)], d);
    double hi = lo;
    for (Eigen::Index i = begin + 1; i < end; ++i) {
      const double v = points_(order_[static_cast<std::size_t>(i)], d);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      axis = static_cast<int>(d);
    }
  }
  if (widest <= 0.0) return id;  // all points identical in every dimension

  const Eigen::Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Eigen::Index a, Eigen::Index b) {
                     return points_(a, axis) < points_(b, axis);
                   });
  nodes_[static_cast<std::size_t>(id)].axis = axis;
  nodes_[static_cast<std::size_t>(id)].split =
      points_(order_[static_cast<std::size_t>(mid)], axis);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void KdTreeMax::search(int node, Eigen::Index query, const Eigen::RowVectorXd& q, int k,
                       std::vector<double>& heap) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.axis < 0) {
    for (Eigen::Index i = n.begin; i < n.end; ++i) {
      const Eigen::Index idx = order_[static_cast<std::size_t>(i)];
      if (idx == query) continue;
      const double dist = (points_.row(idx) - q).cwiseAbs().maxCoeff();
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(dist);
        std::push_heap(heap.begin(), heap.end());
      } else if (dist < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = dist;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search(near, query, q, k, heap);
  // The max norm dominates every per-axis distance, so the split plane
  // gives a valid lower bound for the far side.
  if (static_cast<int>(heap.size()) < k || std::abs(diff) <= heap.front()) {
    search(far, query, q, k, heap);
  }
}

double KdTreeMax::kth_neighbor_distance(Eigen::Index query, int k) const {
  if (query < 0 || query >= points_.rows()) {
    throw DimensionError("KdTreeMax query index out of range");
  }
  if (k < 1 || k >= points_.rows()) {
    throw DimensionError("KdTreeMax requires 1 <= k < point count");
  }
  std::vector<double> heap;
  heap.reserve(static_cast<std::size_t>(k) + 1);
  const Eigen::RowVectorXd q = points_.row(query);
  search(0, query, q, k, heap);
  return heap.front();
}

}  // namespace sgev
