#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "nngp/errors.hpp"
#include "nngp/geometry.hpp"
#include "oracle.hpp"

using namespace nngp;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("coordinate sort orders by x, then y, then input index") {
    const std::vector<Point> pts{{0.9, 0.1}, {0.1, 0.5}, {0.5, 0.5}};
    const LocationSet locs = order_locations(pts, OrderingStrategy::CoordinateSort);
    CHECK(locs.order() == std::vector<std::size_t>{1, 2, 0});
    CHECK(locs.ordered(0).x == 0.1);
    CHECK(locs.ordered(2).x == 0.9);

    const std::vector<Point> tie{{0.5, 0.9}, {0.5, 0.1}};
    const LocationSet tied = order_locations(tie, OrderingStrategy::CoordinateSort);
    CHECK(tied.order() == std::vector<std::size_t>{1, 0});
}

TEST_CASE("single point gets the identity permutation") {
    const LocationSet locs =
        order_locations({{0.25, 0.75}}, OrderingStrategy::CoordinateSort);
    CHECK(locs.size() == 1);
    CHECK(locs.order() == std::vector<std::size_t>{0});
}

TEST_CASE("random ordering is seed-deterministic") {
    const auto pts = oracle::random_points(200, 11);
    const LocationSet a = order_locations(pts, OrderingStrategy::Random, 7);
    const LocationSet b = order_locations(pts, OrderingStrategy::Random, 7);
    CHECK(a.order() == b.order());
    const LocationSet c = order_locations(pts, OrderingStrategy::Random, 8);
    CHECK(a.order() != c.order());
}

TEST_CASE("duplicate points are rejected") {
    CHECK_THROWS_AS(order_locations({{0.1, 0.2}, {0.3, 0.4}, {0.1, 0.2}},
                                    OrderingStrategy::CoordinateSort),
                    DuplicateLocation);
    CHECK_THROWS_AS(order_locations({}, OrderingStrategy::CoordinateSort),
                    std::invalid_argument);
}

TEST_CASE("permutation helpers invert each other") {
    const auto pts = oracle::random_points(40, 3);
    const LocationSet locs = order_locations(pts, OrderingStrategy::Random, 5);
    const Eigen::VectorXd v = oracle::random_normal_vector(40, 9);
    CHECK((locs.to_input(locs.to_ordered(v)) - v).lpNorm<Eigen::Infinity>() == 0.0);
    for (std::size_t k = 0; k < locs.size(); ++k)
        CHECK(locs.position_of(locs.order()[k]) == k);
}

TEST_CASE("three collinear points with m=1 pick the previous point") {
    const std::vector<Point> pts{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    const LocationSet locs = order_locations(pts, OrderingStrategy::CoordinateSort);
    const NeighborGraph graph = build_neighbor_graph(locs, 1);
    CHECK(graph.neighbors(0).empty());
    CHECK(graph.neighbors(1) == std::vector<int>{0});
    CHECK(graph.neighbors(2) == std::vector<int>{1});
}

TEST_CASE("m >= n-1 keeps the full history") {
    const auto pts = oracle::random_points(12, 21);
    const LocationSet locs = order_locations(pts, OrderingStrategy::CoordinateSort);
    const NeighborGraph graph = build_neighbor_graph(locs, 11);
    for (std::size_t i = 0; i < locs.size(); ++i) {
        std::vector<int> expected(i);
        std::iota(expected.begin(), expected.end(), 0);
        CHECK(graph.neighbors(i) == expected);
    }
}

TEST_CASE("neighbor search matches the brute-force oracle") {
    for (const auto& [n, m, seed] :
         {std::tuple{50, 5, 101}, {30, 1, 102}, {80, 9, 103}, {64, 4, 104}}) {
        const auto pts = oracle::random_points(n, static_cast<std::uint64_t>(seed));
        for (const auto strategy : {OrderingStrategy::CoordinateSort, OrderingStrategy::Random}) {
            const LocationSet locs = order_locations(pts, strategy, 17);
            const NeighborGraph graph = build_neighbor_graph(locs, m);
            const auto expected = oracle::brute_force_neighbors(locs, m);
            for (std::size_t i = 0; i < locs.size(); ++i) {
                CAPTURE(i);
                CHECK(graph.neighbors(i) == expected[i]);
                CHECK(graph.neighbors(i).size() ==
                      std::min<std::size_t>(i, static_cast<std::size_t>(m)));
            }
        }
    }
}

TEST_CASE("distance ties resolve to the smaller ordered index") {
    // the center of a square is equidistant from all four corners
    const std::vector<Point> pts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}};
    const std::vector<std::size_t> order{0, 1, 2, 3, 4};
    const LocationSet locs(pts, order);
    const NeighborGraph graph = build_neighbor_graph(locs, 2);
    CHECK(graph.neighbors(4) == std::vector<int>{0, 1});
    const auto expected = oracle::brute_force_neighbors(locs, 2);
    for (std::size_t i = 0; i < locs.size(); ++i) CHECK(graph.neighbors(i) == expected[i]);
}

TEST_CASE("KdTree nearest matches exhaustive search") {
    const auto pts = oracle::random_points(120, 31);
    const KdTree tree(pts);
    Rng rng(77);
    for (int rep = 0; rep < 25; ++rep) {
        const Point q{rng.uniform() * 1.4 - 0.2, rng.uniform() * 1.4 - 0.2};
        const int k = 1 + static_cast<int>(rng.uniform_below(12));
        std::vector<std::pair<double, int>> cand;
        for (std::size_t j = 0; j < pts.size(); ++j)
            cand.emplace_back(squared_distance(q, pts[j]), static_cast<int>(j));
        std::sort(cand.begin(), cand.end());
        std::vector<int> expected;
        for (int a = 0; a < k; ++a) expected.push_back(cand[static_cast<std::size_t>(a)].second);
        CHECK(tree.nearest(q, k) == expected);
    }
    CHECK(tree.nearest(pts[0], 10000).size() == pts.size());
}

TEST_SUITE_END();
