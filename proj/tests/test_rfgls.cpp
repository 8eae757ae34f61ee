#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nngp/rfgls.hpp"
#include "oracle.hpp"
#include "reference_cart.hpp"

using namespace nngp;

namespace {

// Locations generated pre-sorted in x so the Vecchia ordering equals the
// input order and row indices line up with factor rows.
LocationSet sorted_locations(int n, std::uint64_t seed) {
    auto pts = oracle::random_points(n, seed);
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    return order_locations(pts, OrderingStrategy::CoordinateSort);
}

std::vector<int> identity_resample(int n) {
    std::vector<int> sel(static_cast<std::size_t>(n));
    std::iota(sel.begin(), sel.end(), 0);
    return sel;
}

SparseCholesky random_gp_factor(const LocationSet& locs, std::uint64_t seed) {
    const NeighborGraph graph = build_neighbor_graph(locs, 6);
    const CovarianceSpec spec{KernelFamily::Exponential, 1.0 + 0.5 * (seed % 3), 3.0, 0.2};
    return build_factor(locs, graph, spec, FactorTarget::Response);
}

double leaf_sse(const Eigen::VectorXd& y, const std::vector<std::vector<int>>& leaves) {
    double total = 0.0;
    for (const auto& leaf : leaves) {
        double mean = 0.0;
        for (const int j : leaf) mean += y[j];
        mean /= static_cast<double>(leaf.size());
        for (const int j : leaf) total += (y[j] - mean) * (y[j] - mean);
    }
    return total;
}

} // namespace

TEST_SUITE_BEGIN("rfgls");

TEST_CASE("gls_split_cost with identity factor and resample is CART SSE") {
    const int n = 24;
    const Eigen::VectorXd y = oracle::random_normal_vector(n, 3001);
    std::vector<std::vector<int>> leaves{{}, {}};
    for (int j = 0; j < n; ++j) leaves[static_cast<std::size_t>(j % 2)].push_back(j);
    const double cost = gls_split_cost(leaves, y, identity_factor(n), identity_resample(n));
    CHECK(cost == doctest::Approx(leaf_sse(y, leaves)).epsilon(1e-12));
}

TEST_CASE("gls_split_cost matches the dense GLS objective") {
    const int n = 30;
    const LocationSet locs = sorted_locations(n, 3002);
    const SparseCholesky chol = random_gp_factor(locs, 0);
    const Eigen::VectorXd y = oracle::random_normal_vector(n, 3003);
    std::vector<std::vector<int>> leaves{{}, {}, {}};
    for (int j = 0; j < n; ++j) leaves[static_cast<std::size_t>(j % 3)].push_back(j);

    const double cost = gls_split_cost(leaves, y, chol, identity_resample(n));

    // dense route: Q = L'L, minimize (y - Z beta)' Q (y - Z beta)
    const Eigen::MatrixXd L = dense_lower_factor(chol);
    const Eigen::MatrixXd Q = L.transpose() * L;
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, 3);
    for (std::size_t g = 0; g < leaves.size(); ++g)
        for (const int j : leaves[g]) Z(j, static_cast<Eigen::Index>(g)) = 1.0;
    const Eigen::MatrixXd A = Z.transpose() * Q * Z;
    const Eigen::VectorXd rhs = Z.transpose() * Q * y;
    const Eigen::VectorXd beta = A.ldlt().solve(rhs);
    const double expected = (y - Z * beta).dot(Q * (y - Z * beta));
    CHECK(cost == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("splitting a constant node cannot reduce the cost") {
    const int n = 16;
    Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 2.5);
    const std::vector<std::vector<int>> parent{identity_resample(n)};
    std::vector<std::vector<int>> split{{}, {}};
    for (int j = 0; j < n; ++j) split[static_cast<std::size_t>(j < 7 ? 0 : 1)].push_back(j);
    const SparseCholesky id = identity_factor(n);
    const double parent_cost = gls_split_cost(parent, y, id, identity_resample(n));
    const double child_cost = gls_split_cost(split, y, id, identity_resample(n));
    CHECK(std::abs(parent_cost - child_cost) < 1e-10);
}

TEST_CASE("refining a partition never increases the minimized cost") {
    const int n = 40;
    const LocationSet locs = sorted_locations(n, 3004);
    const SparseCholesky chol = random_gp_factor(locs, 1);
    const Eigen::VectorXd y = oracle::random_normal_vector(n, 3005);
    Rng rng(3006);
    std::vector<std::vector<int>> leaves{identity_resample(n)};
    double prev = gls_split_cost(leaves, y, chol, identity_resample(n));
    for (int round = 0; round < 4; ++round) {
        // split the largest leaf at a random pivot
        auto largest = std::max_element(leaves.begin(), leaves.end(),
                                        [](const auto& a, const auto& b) { return a.size() < b.size(); });
        const std::size_t pivot = 1 + rng.uniform_below(largest->size() - 1);
        std::vector<int> left(largest->begin(), largest->begin() + static_cast<long>(pivot));
        std::vector<int> right(largest->begin() + static_cast<long>(pivot), largest->end());
        *largest = std::move(left);
        leaves.push_back(std::move(right));
        const double cost = gls_split_cost(leaves, y, chol, identity_resample(n));
        CHECK(cost <= prev + 1e-10);
        prev = cost;
    }
}

TEST_CASE("gls_split_cost validates the partition") {
    const int n = 10;
    const Eigen::VectorXd y = oracle::random_normal_vector(n, 3007);
    const SparseCholesky id = identity_factor(n);
    CHECK_THROWS_AS(gls_split_cost({{0, 1}, {1, 2}}, y, id, identity_resample(n)),
                    std::invalid_argument);
    CHECK_THROWS_AS(gls_split_cost({{0, 1, 2}}, y, id, identity_resample(n)),
                    std::invalid_argument);
}

TEST_CASE("identity GLS trees are node-for-node CART trees") {
    for (const std::uint64_t seed : {10u, 11u, 12u, 13u}) {
        const int n = 50;
        const LocationSet locs = sorted_locations(n, 4000 + seed);
        Rng rng(4100 + seed);
        Eigen::MatrixXd X(n, 3);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 3; ++j) X(i, j) = rng.uniform();
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i)
            y[i] = std::sin(6.0 * X(i, 0)) + 0.5 * X(i, 1) + 0.3 * rng.normal();

        ForestHyper hyper;
        hyper.n_trees = 1;
        hyper.min_node_size = 5;
        hyper.max_leaves = 8;
        hyper.mtry = 3;
        hyper.bootstrap = false;

        const RegressionData data{y, X, locs};
        const Tree tree = build_tree(data, identity_factor(n), 9, hyper);
        const reference::CartTree cart = reference::build_cart(X, y, 5, 8);
        CHECK(reference::trees_match(tree, cart, 1e-9));
    }
}

TEST_CASE("a single distinct feature value gives a root-only tree at the GLS mean") {
    const int n = 20;
    const LocationSet locs = sorted_locations(n, 3008);
    Eigen::MatrixXd X = Eigen::MatrixXd::Constant(n, 1, 0.7);
    const Eigen::VectorXd y = oracle::random_normal_vector(n, 3009);
    ForestHyper hyper;
    hyper.min_node_size = 1;
    hyper.bootstrap = false;
    const Tree tree = build_tree({y, X, locs}, identity_factor(n), 1, hyper);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].beta == doctest::Approx(y.mean()).epsilon(1e-12));
}

TEST_CASE("a step function is recovered by the first split") {
    const int n = 40;
    const LocationSet locs = sorted_locations(n, 3010);
    Eigen::MatrixXd X(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = static_cast<double>(i) / (n - 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = X(i, 0) > 0.55 ? 3.0 : 0.0;
    ForestHyper hyper;
    hyper.min_node_size = 2;
    hyper.bootstrap = false;
    const Tree tree = build_tree({y, X, locs}, identity_factor(n), 1, hyper);
    REQUIRE(!tree.nodes[0].is_leaf());
    CHECK(tree.nodes[0].feature == 0);
    // the step lies between x = 21/39 (below 0.55) and x = 22/39 (above)
    const double lo = 21.0 / 39.0;
    const double hi = 22.0 / 39.0;
    CHECK(tree.nodes[0].threshold > lo - 1e-12);
    CHECK(tree.nodes[0].threshold < hi);
}

TEST_CASE("forests are seed-deterministic and average their trees") {
    const int n = 60;
    const LocationSet locs = sorted_locations(n, 3011);
    Rng rng(3012);
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) X(i, j) = rng.uniform();
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = X(i, 0) * 2.0 + rng.normal() * 0.3;
    const RegressionData data{y, X, locs};
    const SparseCholesky chol = random_gp_factor(locs, 2);

    ForestHyper hyper;
    hyper.n_trees = 7;
    hyper.min_node_size = 3;
    hyper.max_leaves = 6;
    hyper.mtry = 2;

    const ForestModel a = fit_forest(data, chol, hyper, 21, 2);
    const ForestModel b = fit_forest(data, chol, hyper, 21, 1);
    Eigen::MatrixXd grid(10, 2);
    for (int i = 0; i < 10; ++i) {
        grid(i, 0) = i / 9.0;
        grid(i, 1) = 1.0 - i / 9.0;
    }
    CHECK((predict_forest(a, grid, PredictMode::MeanOnly) -
           predict_forest(b, grid, PredictMode::MeanOnly))
              .lpNorm<Eigen::Infinity>() == 0.0);

    // definition check: forest mean is the average of per-tree outputs
    const Eigen::VectorXd forest_mean = predict_forest(a, grid, PredictMode::MeanOnly);
    Eigen::VectorXd manual = Eigen::VectorXd::Zero(grid.rows());
    for (const Tree& tree : a.trees)
        for (Eigen::Index q = 0; q < grid.rows(); ++q) manual[q] += tree.predict_row(grid.row(q));
    manual /= static_cast<double>(a.trees.size());
    CHECK((forest_mean - manual).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("a single identity-resampled tree equals its forest") {
    const int n = 40;
    const LocationSet locs = sorted_locations(n, 3013);
    Rng rng(3014);
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) X(i, j) = rng.uniform();
    const Eigen::VectorXd y = oracle::random_normal_vector(n, 3015);
    const RegressionData data{y, X, locs};
    const SparseCholesky chol = random_gp_factor(locs, 3);

    ForestHyper hyper;
    hyper.n_trees = 1;
    hyper.min_node_size = 4;
    hyper.mtry = 2;
    hyper.bootstrap = false;

    const ForestModel forest = fit_forest(data, chol, hyper, 33, 1);
    const Tree tree = build_tree(data, chol, derive_seed(33, 0), hyper);
    Eigen::MatrixXd grid = Eigen::MatrixXd::Random(12, 2);
    const Eigen::VectorXd from_forest = predict_forest(forest, grid, PredictMode::MeanOnly);
    for (Eigen::Index q = 0; q < grid.rows(); ++q)
        CHECK(from_forest[q] == tree.predict_row(grid.row(q)));
}

TEST_CASE("leaf values satisfy the transformed normal equations") {
    const int n = 50;
    const LocationSet locs = sorted_locations(n, 3016);
    Rng rng(3017);
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) X(i, j) = rng.uniform();
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = std::cos(4.0 * X(i, 0)) + 0.2 * rng.normal();
    const RegressionData data{y, X, locs};
    const SparseCholesky chol = random_gp_factor(locs, 4);

    ForestHyper hyper;
    hyper.min_node_size = 5;
    hyper.max_leaves = 5;
    hyper.mtry = 2;

    for (const bool bootstrap : {false, true}) {
        hyper.bootstrap = bootstrap;
        const std::uint64_t seed = 77;
        const Tree tree = build_tree(data, chol, seed, hyper);

        // reconstruct the resampling exactly as the builder draws it: the
        // first n draws of Rng(seed), or the identity when bootstrap is off
        std::vector<int> sel(static_cast<std::size_t>(n));
        if (bootstrap) {
            Rng tree_rng(seed);
            for (int t = 0; t < n; ++t)
                sel[static_cast<std::size_t>(t)] =
                    static_cast<int>(tree_rng.uniform_below(static_cast<std::uint64_t>(n)));
        } else {
            std::iota(sel.begin(), sel.end(), 0);
        }

        const Eigen::MatrixXd L = dense_lower_factor(chol);
        const Eigen::VectorXd Ly = L * y; // ordering is the identity here
        Eigen::VectorXd ty(n);
        for (int t = 0; t < n; ++t) ty[t] = Ly[sel[static_cast<std::size_t>(t)]];

        // group rows by leaf via routing node id
        std::vector<int> leaf_of(static_cast<std::size_t>(n));
        std::vector<int> leaf_ids;
        for (int i = 0; i < n; ++i) {
            int node = 0;
            while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
                const TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
                node = X(i, tn.feature) <= tn.threshold ? tn.left : tn.right;
            }
            auto it = std::find(leaf_ids.begin(), leaf_ids.end(), node);
            if (it == leaf_ids.end()) {
                leaf_ids.push_back(node);
                it = leaf_ids.end() - 1;
            }
            leaf_of[static_cast<std::size_t>(i)] =
                static_cast<int>(std::distance(leaf_ids.begin(), it));
        }
        const int K = static_cast<int>(leaf_ids.size());
        Eigen::MatrixXd Zt = Eigen::MatrixXd::Zero(n, K);
        for (int t = 0; t < n; ++t) {
            const int row = sel[static_cast<std::size_t>(t)];
            for (int j = 0; j < n; ++j) {
                if (L(row, j) != 0.0)
                    Zt(t, leaf_of[static_cast<std::size_t>(j)]) += L(row, j);
            }
        }
        Eigen::VectorXd beta(K);
        for (int g = 0; g < K; ++g)
            beta[g] = tree.nodes[static_cast<std::size_t>(leaf_ids[static_cast<std::size_t>(g)])].beta;
        const Eigen::VectorXd resid = ty - Zt * beta;
        for (int g = 0; g < K; ++g) CHECK(std::abs(Zt.col(g).dot(resid)) < 1e-8);
    }
}

TEST_CASE("constant training responses predict the constant") {
    const int n = 30;
    const LocationSet locs = sorted_locations(n, 3020);
    Rng rng(3021);
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) X(i, j) = rng.uniform();
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 4.2);
    const RegressionData data{y, X, locs};
    ForestHyper hyper;
    hyper.n_trees = 5;
    hyper.min_node_size = 3;
    const ForestModel model = fit_forest(data, identity_factor(n), hyper, 3, 1);
    const Eigen::MatrixXd grid = Eigen::MatrixXd::Random(8, 2);
    const Eigen::VectorXd pred = predict_forest(model, grid, PredictMode::MeanOnly);
    for (Eigen::Index q = 0; q < pred.size(); ++q)
        CHECK(pred[q] == doctest::Approx(4.2).epsilon(1e-9));
}

TEST_CASE("kriging mode interpolates noiseless training data") {
    const int n = 50;
    const LocationSet locs = sorted_locations(n, 3022);
    Rng rng(3023);
    Eigen::MatrixXd X(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = rng.uniform();
    const CovarianceSpec spec{KernelFamily::Exponential, 1.0, 3.0, 0.0};
    const Eigen::MatrixXd cov = oracle::dense_cov(spec, locs.input_points(), false);
    const Eigen::VectorXd w =
        oracle::dense_gp_draw(Eigen::LLT<Eigen::MatrixXd>(cov).matrixL(), 3024);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = (X(i, 0) > 0.5 ? 2.0 : 0.0) + w[i];
    const RegressionData data{y, X, locs};
    const NeighborGraph graph = build_neighbor_graph(locs, 8);
    const SparseCholesky chol = build_factor(locs, graph, spec, FactorTarget::Response);

    ForestHyper hyper;
    hyper.n_trees = 10;
    hyper.min_node_size = 5;
    hyper.max_leaves = 6;
    const ForestModel model = fit_forest(data, chol, hyper, 5, 2);

    SpatialPredictContext ctx{X, y, locs.input_points(), locs.input_points(), spec, 10};
    const Eigen::VectorXd pred = predict_forest(model, X, PredictMode::MeanPlusKriging, &ctx);
    for (int i = 0; i < n; ++i) CHECK(pred[i] == doctest::Approx(y[i]).epsilon(1e-7));

    CHECK_THROWS_AS(predict_forest(model, Eigen::MatrixXd::Random(4, 3), PredictMode::MeanOnly),
                    std::invalid_argument);
    CHECK_THROWS_AS(predict_forest(model, X, PredictMode::MeanPlusKriging, nullptr),
                    std::invalid_argument);
}

TEST_SUITE_END();
