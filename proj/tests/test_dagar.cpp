#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nngp/dagar.hpp"
#include "oracle.hpp"

using namespace nngp;

namespace {

ArealGraph path_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return ArealGraph(n, std::move(edges));
}

ArealGraph star_graph(int leaves) { // vertex 0 is the hub
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
    return ArealGraph(leaves + 1, std::move(edges));
}

Eigen::MatrixXd dense_precision(const SparseCholesky& chol) {
    const Eigen::MatrixXd L = dense_lower_factor(chol);
    return L.transpose() * L;
}

} // namespace

TEST_SUITE_BEGIN("dagar");

TEST_CASE("edge lists parse with line-numbered errors") {
    std::istringstream good("0 1\n1 2\n# comment\n\n2 3\n");
    const ArealGraph graph = read_edge_list(good);
    CHECK(graph.n_regions() == 4);
    CHECK(graph.edges().size() == 3);
    CHECK(graph.degree(1) == 2);

    std::istringstream bad("0 1\nnot numbers\n");
    CHECK_THROWS_WITH_AS(read_edge_list(bad), doctest::Contains("line 2"), std::runtime_error);
    std::istringstream self_loop("0 0\n");
    CHECK_THROWS_AS(read_edge_list(self_loop), std::invalid_argument);
    std::istringstream duplicate("0 1\n1 0\n");
    CHECK_THROWS_AS(read_edge_list(duplicate), std::invalid_argument);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_edge_list(empty), std::runtime_error);
}

TEST_CASE("rho = 0 reduces to independent noise") {
    const ArealGraph graph = grid_graph(3, 3);
    const DagarSpec spec{0.0, 2.0};
    const Eigen::MatrixXd precision = dense_precision(build_dagar_factor(graph, spec));
    CHECK((precision - Eigen::MatrixXd::Identity(9, 9) / 2.0).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("path graphs realize an AR(1) covariance") {
    const int n = 6;
    const ArealGraph graph = path_graph(n);
    const double rho = 0.6;
    const double sigma2 = 1.3;
    const Eigen::MatrixXd cov = dagar_covariance(graph, {rho, sigma2});
    const double marginal = sigma2 / (1.0 - rho * rho);
    for (int i = 0; i < n; ++i) {
        CHECK(cov(i, i) == doctest::Approx(marginal).epsilon(1e-12));
        for (int j = 0; j < n; ++j)
            CHECK(cov(i, j) ==
                  doctest::Approx(marginal * std::pow(rho, std::abs(i - j))).epsilon(1e-12));
    }
}

TEST_CASE("hub-first star graphs are homoskedastic with neighbor correlation rho") {
    const ArealGraph graph = star_graph(5);
    const double rho = 0.45;
    const Eigen::MatrixXd cov = dagar_covariance(graph, {rho, 1.0});
    const double marginal = 1.0 / (1.0 - rho * rho);
    for (int i = 0; i < graph.n_regions(); ++i)
        CHECK(cov(i, i) == doctest::Approx(marginal).epsilon(1e-12));
    for (const auto& [a, b] : graph.edges())
        CHECK(cov(a, b) / std::sqrt(cov(a, a) * cov(b, b)) == doctest::Approx(rho).epsilon(1e-12));
}

TEST_CASE("row-major grids are homoskedastic with neighbor correlation rho") {
    const ArealGraph graph = grid_graph(3, 3);
    for (const double rho : {0.1, 0.5, 0.9}) {
        const Eigen::MatrixXd cov = dagar_covariance(graph, {rho, 1.0});
        const double var0 = cov(0, 0);
        for (int i = 0; i < 9; ++i) CHECK(std::abs(cov(i, i) - var0) < 1e-10);
        for (const auto& [a, b] : graph.edges())
            CHECK(std::abs(cov(a, b) / std::sqrt(cov(a, a) * cov(b, b)) - rho) < 1e-10);
    }
}

TEST_CASE("the DAGAR precision stays positive definite across rho") {
    for (const auto make :
         {+[] { return path_graph(7); }, +[] { return star_graph(6); },
          +[] { return grid_graph(4, 5); }}) {
        const ArealGraph graph = make();
        for (const double rho : {0.0, 0.3, 0.7, 0.99}) {
            const Eigen::MatrixXd precision =
                dense_precision(build_dagar_factor(graph, {rho, 1.0}));
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(precision,
                                                                     Eigen::EigenvaluesOnly);
            CHECK(eig.eigenvalues()[0] > 0.0);
        }
    }
}

TEST_CASE("rho -> 1 recovers directed-neighbor averaging") {
    const ArealGraph graph = grid_graph(3, 3);
    const SparseCholesky chol = build_dagar_factor(graph, {1.0 - 1e-9, 1.0});
    for (std::size_t i = 0; i < chol.size(); ++i) {
        const auto k = chol.neighbors[i].size();
        for (const double b : chol.b_rows[i])
            CHECK(b == doctest::Approx(1.0 / static_cast<double>(k)).epsilon(1e-6));
    }
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS((DagarSpec{1.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((DagarSpec{-0.1, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((DagarSpec{0.5, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("CAR precision base cases and singularity") {
    const ArealGraph graph = grid_graph(3, 3);
    const Eigen::MatrixXd at_zero = car_precision(graph, 0.0, 2.0);
    CHECK((at_zero - Eigen::MatrixXd(graph.degree_vector().asDiagonal()) / 2.0)
              .lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK_THROWS_WITH_AS(car_precision(graph, 1.0, 1.0), doctest::Contains("eigenvalue"),
                         std::runtime_error);

    // heteroskedasticity direction: corners have more variance than the center
    const Eigen::MatrixXd cov =
        car_precision(graph, 0.9, 1.0).llt().solve(Eigen::MatrixXd::Identity(9, 9));
    CHECK(cov(0, 0) > cov(4, 4));
}

TEST_CASE("grid symmetry groups for the 3x3 grid") {
    const ArealGraph graph = grid_graph(3, 3);
    const SymmetryGroups groups = grid_symmetry_groups(3, 3, graph);
    CHECK(groups.n_vertex_groups == 3);
    CHECK(groups.n_edge_groups == 2);
    std::vector<int> counts(3, 0);
    for (const int g : groups.vertex_group) ++counts[static_cast<std::size_t>(g)];
    std::sort(counts.begin(), counts.end());
    CHECK(counts == std::vector<int>{1, 4, 4});
}

TEST_CASE("CAR diagnostics split the grid into unequal groups; DAGAR stays flat") {
    const ArealGraph graph = grid_graph(3, 3);
    const SymmetryGroups groups = grid_symmetry_groups(3, 3, graph);

    const auto rows = car_diagnostics(graph, {0.0, 0.5, 1.0}, groups, 1.0);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].singular); // rho = 1 is flagged, not fatal

    // rho = 0: variances are sigma2 / degree, correlations vanish
    for (int v = 0; v < 9; ++v) {
        const int g = groups.vertex_group[static_cast<std::size_t>(v)];
        CHECK(rows[0].stats.vertex_variance[static_cast<std::size_t>(g)] ==
              doctest::Approx(1.0 / graph.degree(v)).epsilon(1e-12));
    }
    for (const double corr : rows[0].stats.edge_correlation)
        CHECK(std::abs(corr) < 1e-12);

    // rho = 0.5: the three vertex groups separate
    const auto& mid = rows[1].stats.vertex_variance;
    CHECK(std::abs(mid[0] - mid[1]) > 1e-4);
    CHECK(std::abs(mid[1] - mid[2]) > 1e-4);

    // DAGAR on the same grid: flat across groups
    for (const double rho : {0.1, 0.5, 0.9}) {
        const GroupStats stats =
            covariance_group_stats(dagar_covariance(graph, {rho, 1.0}), graph, groups);
        for (std::size_t g = 1; g < stats.vertex_variance.size(); ++g)
            CHECK(std::abs(stats.vertex_variance[g] - stats.vertex_variance[0]) < 1e-10);
    }
}

TEST_CASE("dagar_loglik matches independent normals at rho 0 and the dense density") {
    const ArealGraph graph = grid_graph(3, 3);
    const Eigen::VectorXd w = oracle::random_normal_vector(9, 42);

    const double sigma2 = 1.7;
    double expected = 0.0;
    for (int i = 0; i < 9; ++i)
        expected += -0.5 * std::log(2.0 * M_PI * sigma2) - 0.5 * w[i] * w[i] / sigma2;
    CHECK(dagar_loglik(graph, {0.0, sigma2}, w) == doctest::Approx(expected).epsilon(1e-13));

    const DagarSpec spec{0.55, 1.2};
    const Eigen::MatrixXd cov = dagar_covariance(graph, spec);
    CHECK(dagar_loglik(graph, spec, w) ==
          doctest::Approx(oracle::mvn_logpdf(w, Eigen::VectorXd::Zero(9), cov)).epsilon(1e-10));
}

TEST_CASE("reversing a path's ordering preserves the likelihood of symmetric fields") {
    const int n = 5;
    ArealGraph forward = path_graph(n);
    ArealGraph backward = path_graph(n);
    backward.set_order({4, 3, 2, 1, 0});
    Eigen::VectorXd w(n);
    w << 0.3, -1.1, 0.8, -1.1, 0.3; // symmetric under reversal
    const DagarSpec spec{0.7, 1.0};
    CHECK(dagar_loglik(forward, spec, w) ==
          doctest::Approx(dagar_loglik(backward, spec, w)).epsilon(1e-12));
}

TEST_CASE("orderings are validated and generated deterministically") {
    ArealGraph graph = star_graph(4);
    CHECK_THROWS_AS(graph.set_order({0, 1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(graph.set_order({0, 0, 1, 2, 3}), std::invalid_argument);
    const auto by_degree = degree_sorted_order(graph);
    CHECK(by_degree == std::vector<int>{1, 2, 3, 4, 0}); // hub last
    CHECK(random_order(5, 9) == random_order(5, 9));
}

TEST_SUITE_END();
