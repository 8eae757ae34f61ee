#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace nngp {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance(const Point& a, const Point& b) {
    return std::sqrt(squared_distance(a, b));
}

enum class OrderingStrategy {
    CoordinateSort, ///< ascending x, ties by y then input index
    Random          ///< seed-deterministic uniform permutation
};

/// Point cloud together with the permutation that fixes the conditioning
/// order. Position k in the ordering refers to input point order()[k].
class LocationSet {
public:
    LocationSet(std::vector<Point> points, std::vector<std::size_t> order);

    std::size_t size() const { return points_.size(); }

    /// Point at ordered position k.
    const Point& ordered(std::size_t k) const { return points_[order_[k]]; }

    /// Points in ordered sequence (copy).
    std::vector<Point> ordered_points() const;

    const std::vector<Point>& input_points() const { return points_; }
    const std::vector<std::size_t>& order() const { return order_; }

    /// Ordered position of input row j.
    std::size_t position_of(std::size_t j) const { return position_[j]; }

    /// Permute an input-aligned vector into ordering-aligned layout.
    Eigen::VectorXd to_ordered(const Eigen::VectorXd& input_aligned) const;
    Eigen::MatrixXd to_ordered_rows(const Eigen::MatrixXd& input_aligned) const;

    /// Inverse of to_ordered.
    Eigen::VectorXd to_input(const Eigen::VectorXd& ordering_aligned) const;

private:
    std::vector<Point> points_;
    std::vector<std::size_t> order_;    // order_[k] = input index at position k
    std::vector<std::size_t> position_; // position_[j] = ordered position of input j
};

/// Orders a point cloud for Vecchia-style conditioning. Rejects duplicate
/// points, which would make downstream conditional variances degenerate.
LocationSet order_locations(std::vector<Point> points, OrderingStrategy strategy,
                            std::uint64_t seed = 0);

/// Directed nearest-neighbor sets: neighbors(i) holds the min(i, m) earlier
/// ordered positions closest to position i, ascending.
class NeighborGraph {
public:
    NeighborGraph(std::vector<std::vector<int>> neighbors, int m);

    std::size_t size() const { return neighbors_.size(); }
    int max_neighbors() const { return m_; }
    const std::vector<int>& neighbors(std::size_t i) const { return neighbors_[i]; }
    const std::vector<std::vector<int>>& rows() const { return neighbors_; }

private:
    std::vector<std::vector<int>> neighbors_;
    int m_ = 0;
};

/// Exact directed m-nearest-neighbor search over the ordering. Distance ties
/// resolve to the smaller ordered index.
NeighborGraph build_neighbor_graph(const LocationSet& locs, int m);

/// Static kd-tree for exact k-nearest-neighbor queries (ties by smaller id).
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(std::vector<Point> points); // ids 0..n-1
    KdTree(std::vector<Point> points, std::vector<int> ids);

    std::size_t size() const { return nodes_.size(); }

    /// Ids of the k nearest stored points, ascending by (distance, id).
    std::vector<int> nearest(const Point& query, int k) const;

    /// Merges this tree's candidates into an externally owned heap; used to
    /// query several trees as one set.
    class Heap;
    void search(const Point& query, Heap& heap) const;

private:
    struct Node {
        Point pt;
        int id = -1;
        int left = -1;
        int right = -1;
        std::uint8_t axis = 0;
    };
    int build(std::vector<std::pair<Point, int>>& items, int begin, int end, int depth);

    std::vector<Node> nodes_;
    int root_ = -1;
};

/// Bounded worst-first heap of (squared distance, id) candidates.
class KdTree::Heap {
public:
    explicit Heap(int k) : k_(k) {}

    void offer(double d2, int id);
    bool full() const { return static_cast<int>(entries_.size()) == k_; }
    double worst_d2() const { return entries_.front().first; }

    /// Kept ids sorted ascending by (distance, id).
    std::vector<int> take_sorted();

private:
    int k_;
    std::vector<std::pair<double, int>> entries_; // max-heap, worst on top
};

} // namespace nngp
