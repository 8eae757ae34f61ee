#include "nngp/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nngp/errors.hpp"
#include "nngp/rng.hpp"

namespace nngp {

namespace {

void check_no_duplicates(const std::vector<Point>& points) {
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const Point& p = points[a];
        const Point& q = points[b];
        return p.x != q.x ? p.x < q.x : p.y < q.y;
    });
    for (std::size_t k = 1; k < idx.size(); ++k) {
        if (points[idx[k - 1]] == points[idx[k]]) {
            std::ostringstream msg;
            msg << "duplicate location (" << points[idx[k]].x << ", " << points[idx[k]].y
                << ") at input indices " << idx[k - 1] << " and " << idx[k];
            throw DuplicateLocation(msg.str());
        }
    }
}

} // namespace

LocationSet::LocationSet(std::vector<Point> points, std::vector<std::size_t> order)
    : points_(std::move(points)), order_(std::move(order)) {
    if (points_.empty()) throw std::invalid_argument("LocationSet: need at least one point");
    if (order_.size() != points_.size())
        throw std::invalid_argument("LocationSet: order length does not match point count");
    position_.assign(points_.size(), points_.size());
    for (std::size_t k = 0; k < order_.size(); ++k) {
        if (order_[k] >= points_.size() || position_[order_[k]] != points_.size())
            throw std::invalid_argument("LocationSet: order is not a permutation");
        position_[order_[k]] = k;
    }
    check_no_duplicates(points_);
}

std::vector<Point> LocationSet::ordered_points() const {
    std::vector<Point> out(points_.size());
    for (std::size_t k = 0; k < points_.size(); ++k) out[k] = points_[order_[k]];
    return out;
}

Eigen::VectorXd LocationSet::to_ordered(const Eigen::VectorXd& input_aligned) const {
    if (static_cast<std::size_t>(input_aligned.size()) != size())
        throw std::invalid_argument("to_ordered: length mismatch");
    Eigen::VectorXd out(input_aligned.size());
    for (std::size_t k = 0; k < size(); ++k) out[static_cast<Eigen::Index>(k)] = input_aligned[static_cast<Eigen::Index>(order_[k])];
    return out;
}

Eigen::MatrixXd LocationSet::to_ordered_rows(const Eigen::MatrixXd& input_aligned) const {
    if (static_cast<std::size_t>(input_aligned.rows()) != size())
        throw std::invalid_argument("to_ordered_rows: row count mismatch");
    Eigen::MatrixXd out(input_aligned.rows(), input_aligned.cols());
    for (std::size_t k = 0; k < size(); ++k) out.row(static_cast<Eigen::Index>(k)) = input_aligned.row(static_cast<Eigen::Index>(order_[k]));
    return out;
}

Eigen::VectorXd LocationSet::to_input(const Eigen::VectorXd& ordering_aligned) const {
    if (static_cast<std::size_t>(ordering_aligned.size()) != size())
        throw std::invalid_argument("to_input: length mismatch");
    Eigen::VectorXd out(ordering_aligned.size());
    for (std::size_t k = 0; k < size(); ++k) out[static_cast<Eigen::Index>(order_[k])] = ordering_aligned[static_cast<Eigen::Index>(k)];
    return out;
}

LocationSet order_locations(std::vector<Point> points, OrderingStrategy strategy,
                            std::uint64_t seed) {
    if (points.empty()) throw std::invalid_argument("order_locations: need at least one point");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    switch (strategy) {
    case OrderingStrategy::CoordinateSort:
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const Point& p = points[a];
            const Point& q = points[b];
            if (p.x != q.x) return p.x < q.x;
            if (p.y != q.y) return p.y < q.y;
            return a < b;
        });
        break;
    case OrderingStrategy::Random: {
        Rng rng(seed);
        for (std::size_t k = points.size() - 1; k > 0; --k) {
            const auto j = static_cast<std::size_t>(rng.uniform_below(k + 1));
            std::swap(order[k], order[j]);
        }
        break;
    }
    }
    return LocationSet(std::move(points), std::move(order));
}

NeighborGraph::NeighborGraph(std::vector<std::vector<int>> neighbors, int m)
    : neighbors_(std::move(neighbors)), m_(m) {
    if (m_ < 1) throw std::invalid_argument("NeighborGraph: m must be >= 1");
    for (std::size_t i = 0; i < neighbors_.size(); ++i) {
        const auto& row = neighbors_[i];
        const std::size_t expected = std::min<std::size_t>(i, static_cast<std::size_t>(m_));
        if (row.size() != expected)
            throw std::invalid_argument("NeighborGraph: row has wrong neighbor count");
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k] < 0 || static_cast<std::size_t>(row[k]) >= i)
                throw std::invalid_argument("NeighborGraph: neighbor index not earlier than row");
            if (k > 0 && row[k - 1] >= row[k])
                throw std::invalid_argument("NeighborGraph: neighbor row not strictly ascending");
        }
    }
}

// ---------------------------------------------------------------------------
// kd-tree

void KdTree::Heap::offer(double d2, int id) {
    const std::pair<double, int> cand{d2, id};
    if (static_cast<int>(entries_.size()) < k_) {
        entries_.push_back(cand);
        std::push_heap(entries_.begin(), entries_.end());
    } else if (cand < entries_.front()) {
        std::pop_heap(entries_.begin(), entries_.end());
        entries_.back() = cand;
        std::push_heap(entries_.begin(), entries_.end());
    }
}

std::vector<int> KdTree::Heap::take_sorted() {
    std::sort(entries_.begin(), entries_.end());
    std::vector<int> ids;
    ids.reserve(entries_.size());
    for (const auto& [d2, id] : entries_) ids.push_back(id);
    return ids;
}

KdTree::KdTree(std::vector<Point> points) {
    std::vector<int> ids(points.size());
    std::iota(ids.begin(), ids.end(), 0);
    *this = KdTree(std::move(points), std::move(ids));
}

KdTree::KdTree(std::vector<Point> points, std::vector<int> ids) {
    if (points.size() != ids.size())
        throw std::invalid_argument("KdTree: points/ids size mismatch");
    std::vector<std::pair<Point, int>> items(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) items[i] = {points[i], ids[i]};
    nodes_.reserve(items.size());
    root_ = build(items, 0, static_cast<int>(items.size()), 0);
}

int KdTree::build(std::vector<std::pair<Point, int>>& items, int begin, int end, int depth) {
    if (begin >= end) return -1;
    const std::uint8_t axis = static_cast<std::uint8_t>(depth & 1);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(items.begin() + begin, items.begin() + mid, items.begin() + end,
                     [axis](const auto& a, const auto& b) {
                         const double av = axis == 0 ? a.first.x : a.first.y;
                         const double bv = axis == 0 ? b.first.x : b.first.y;
                         if (av != bv) return av < bv;
                         return a.second < b.second;
                     });
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{items[mid].first, items[mid].second, -1, -1, axis});
    const int left = build(items, begin, mid, depth + 1);
    const int right = build(items, mid + 1, end, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

void KdTree::search(const Point& query, Heap& heap) const {
    if (root_ < 0) return;
    // Near side first; the far side is pruned only on a strictly larger axis
    // distance, so equal-distance ties stay exact.
    auto walk = [&](auto&& self, int idx) -> void {
        if (idx < 0) return;
        const Node& node = nodes_[static_cast<std::size_t>(idx)];
        heap.offer(squared_distance(query, node.pt), node.id);
        const double qv = node.axis == 0 ? query.x : query.y;
        const double nv = node.axis == 0 ? node.pt.x : node.pt.y;
        const double delta = qv - nv;
        const int near = delta < 0 ? node.left : node.right;
        const int far = delta < 0 ? node.right : node.left;
        self(self, near);
        if (!heap.full() || delta * delta <= heap.worst_d2()) self(self, far);
    };
    walk(walk, root_);
}

std::vector<int> KdTree::nearest(const Point& query, int k) const {
    if (k <= 0) return {};
    Heap heap(std::min<int>(k, static_cast<int>(nodes_.size())));
    search(query, heap);
    return heap.take_sorted();
}

namespace {

// Insert-only exact k-NN structure: a logarithmic ladder of static kd-trees
// (sizes are powers of two). Insertion merges like a binary counter; a query
// visits every live tree through one shared heap.
class IncrementalKnn {
public:
    void insert(const Point& p, int id) {
        std::vector<Point> pts{p};
        std::vector<int> ids{id};
        std::size_t slot = 0;
        while (slot < trees_.size() && trees_[slot].size() > 0) {
            for (const auto& item : buffers_[slot]) {
                pts.push_back(item.first);
                ids.push_back(item.second);
            }
            trees_[slot] = KdTree();
            buffers_[slot].clear();
            ++slot;
        }
        if (slot == trees_.size()) {
            trees_.emplace_back();
            buffers_.emplace_back();
        }
        buffers_[slot].reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) buffers_[slot].emplace_back(pts[i], ids[i]);
        trees_[slot] = KdTree(std::move(pts), std::move(ids));
    }

    std::vector<int> nearest(const Point& query, int k) const {
        if (k <= 0) return {};
        KdTree::Heap heap(k);
        for (const auto& tree : trees_) tree.search(query, heap);
        return heap.take_sorted();
    }

private:
    std::vector<KdTree> trees_;
    std::vector<std::vector<std::pair<Point, int>>> buffers_; // points backing each tree
};

} // namespace

NeighborGraph build_neighbor_graph(const LocationSet& locs, int m) {
    if (m < 1) throw std::invalid_argument("build_neighbor_graph: m must be >= 1");
    const std::size_t n = locs.size();
    std::vector<std::vector<int>> rows(n);
    IncrementalKnn knn;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = locs.ordered(i);
        if (i > 0) {
            const int k = static_cast<int>(std::min<std::size_t>(i, static_cast<std::size_t>(m)));
            rows[i] = knn.nearest(p, k);
            std::sort(rows[i].begin(), rows[i].end());
        }
        knn.insert(p, static_cast<int>(i));
    }
    return NeighborGraph(std::move(rows), m);
}

} // namespace nngp
