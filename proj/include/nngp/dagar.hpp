#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nngp/sparse_cholesky.hpp"

namespace nngp {

/// Undirected simple region-adjacency graph plus the vertex ordering used to
/// direct it. order[k] is the region at ordered position k.
class ArealGraph {
public:
    ArealGraph(int n_regions, std::vector<std::pair<int, int>> edges);

    int n_regions() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<std::vector<int>>& adjacency() const { return adj_; }
    int degree(int v) const { return static_cast<int>(adj_[static_cast<std::size_t>(v)].size()); }

    const std::vector<int>& order() const { return order_; }
    void set_order(std::vector<int> order);

    Eigen::MatrixXd adjacency_matrix() const;
    Eigen::VectorXd degree_vector() const;

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> order_; // defaults to input order
};

/// Parses whitespace-separated `i j` pairs, one undirected edge per line,
/// 0-indexed; blank lines and lines starting with '#' are skipped. The region
/// count is 1 + the largest index seen.
ArealGraph read_edge_list(std::istream& in);
ArealGraph read_edge_list_file(const std::string& path);

/// Common ordering choices for directing the graph.
std::vector<int> degree_sorted_order(const ArealGraph& graph); // ascending degree, ties by index
std::vector<int> random_order(int n, std::uint64_t seed);

struct DagarSpec {
    double rho = 0.5;   // neighbor correlation, in [0, 1)
    double sigma2 = 1.0;

    void validate() const;
};

/// Sparse Cholesky rows of the DAGAR precision: for ordered position i with
/// k directed neighbors, every coefficient is rho / (1 + (k-1) rho^2) and the
/// conditional variance is sigma2 / (1 + (k-1) rho^2). Row indices refer to
/// ordered positions.
SparseCholesky build_dagar_factor(const ArealGraph& graph, const DagarSpec& spec);

/// Proper-CAR precision (D - rho A) / sigma2 as a dense matrix; throws when
/// the matrix is not positive definite, naming the offending eigenvalue.
Eigen::MatrixXd car_precision(const ArealGraph& graph, double rho, double sigma2);

/// Gaussian log-density of w under the DAGAR model; O(n + e) work.
double dagar_loglik(const ArealGraph& graph, const DagarSpec& spec, const Eigen::VectorXd& w);

/// Dense DAGAR covariance indexed by region (not ordered position); small-n
/// diagnostic.
Eigen::MatrixXd dagar_covariance(const ArealGraph& graph, const DagarSpec& spec);

/// Vertex and edge orbits under the symmetries of a rows x cols grid
/// (reflections, plus transpose for square grids). Vertices are numbered
/// row-major; edge groups align with ArealGraph::edges().
struct SymmetryGroups {
    std::vector<int> vertex_group;
    std::vector<int> edge_group;
    int n_vertex_groups = 0;
    int n_edge_groups = 0;
};
SymmetryGroups grid_symmetry_groups(int rows, int cols, const ArealGraph& graph);

/// Rows x cols grid graph with row-major vertex numbering.
ArealGraph grid_graph(int rows, int cols);

/// Per-group marginal variances and neighbor-pair correlations of a dense
/// covariance matrix over the graph.
struct GroupStats {
    std::vector<double> vertex_variance;    // one per vertex group
    std::vector<double> edge_correlation;   // one per edge group
};
GroupStats covariance_group_stats(const Eigen::MatrixXd& cov, const ArealGraph& graph,
                                  const SymmetryGroups& groups);

/// CAR covariance diagnostics over a rho grid; singular rho values are
/// flagged and carry no stats.
struct CarDiagnosticsRow {
    double rho = 0.0;
    bool singular = false;
    GroupStats stats;
};
std::vector<CarDiagnosticsRow> car_diagnostics(const ArealGraph& graph,
                                               const std::vector<double>& rho_grid,
                                               const SymmetryGroups& groups,
                                               double sigma2 = 1.0);

} // namespace nngp
