#pragma once

#include <Eigen/Core>
#include <vector>

namespace sgev {

// Exact k-nearest-neighbor queries under the max (Chebyshev) norm.
class KdTreeMax {
 public:
  explicit KdTreeMax(const Eigen::MatrixXd& points, int leaf_size = 16);

  // Max-norm distance from points.row(query) to its k-th nearest
  // neighbor, the query point itself excluded.
  double kth_neighbor_distance(Eigen::Index query, int k) const;

 private:
  struct Node {
    int axis = -1;           // -1 marks a leaf
    double split = 0.0;
    Eigen::Index begin = 0;  // range into order_
    Eigen::Index end = 0;
    int left = -1;
    int right = -1;
  };

  int build(Eigen::Index begin, Eigen::Index end);
  void search(int node, Eigen::Index query, const Eigen::RowVectorXd& q, int k,
              std::vector<double>& heap) const;

  Eigen::MatrixXd points_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
  int leaf_size_;
};

}  // namespace sgev
