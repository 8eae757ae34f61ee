#include "nngp/dagar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nngp/rng.hpp"

namespace nngp {

ArealGraph::ArealGraph(int n_regions, std::vector<std::pair<int, int>> edges)
    : n_(n_regions), edges_(std::move(edges)) {
    if (n_ < 1) throw std::invalid_argument("ArealGraph: need at least one region");
    adj_.resize(static_cast<std::size_t>(n_));
    std::set<std::pair<int, int>> seen;
    for (auto& [a, b] : edges_) {
        if (a < 0 || b < 0 || a >= n_ || b >= n_)
            throw std::invalid_argument("ArealGraph: edge endpoint out of range");
        if (a == b) throw std::invalid_argument("ArealGraph: self-loops are not allowed");
        if (a > b) std::swap(a, b);
        if (!seen.insert({a, b}).second)
            throw std::invalid_argument("ArealGraph: duplicate edge");
        adj_[static_cast<std::size_t>(a)].push_back(b);
        adj_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& row : adj_) std::sort(row.begin(), row.end());
    order_.resize(static_cast<std::size_t>(n_));
    std::iota(order_.begin(), order_.end(), 0);
}

void ArealGraph::set_order(std::vector<int> order) {
    if (static_cast<int>(order.size()) != n_)
        throw std::invalid_argument("ArealGraph: order length != region count");
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    for (int v : order) {
        if (v < 0 || v >= n_ || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("ArealGraph: order is not a permutation");
        seen[static_cast<std::size_t>(v)] = 1;
    }
    order_ = std::move(order);
}

Eigen::MatrixXd ArealGraph::adjacency_matrix() const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& [a, b] : edges_) {
        A(a, b) = 1.0;
        A(b, a) = 1.0;
    }
    return A;
}

Eigen::VectorXd ArealGraph::degree_vector() const {
    Eigen::VectorXd d(n_);
    for (int v = 0; v < n_; ++v) d[v] = static_cast<double>(degree(v));
    return d;
}

ArealGraph read_edge_list(std::istream& in) {
    std::vector<std::pair<int, int>> edges;
    int max_vertex = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        long long a = 0, b = 0;
        if (!(fields >> a >> b)) {
            throw std::runtime_error("edge list: line " + std::to_string(line_no) +
                                     ": expected two vertex indices");
        }
        std::string rest;
        if (fields >> rest) {
            throw std::runtime_error("edge list: line " + std::to_string(line_no) +
                                     ": trailing content '" + rest + "'");
        }
        if (a < 0 || b < 0) {
            throw std::runtime_error("edge list: line " + std::to_string(line_no) +
                                     ": vertex indices must be >= 0");
        }
        edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
        max_vertex = std::max({max_vertex, static_cast<int>(a), static_cast<int>(b)});
    }
    if (edges.empty()) throw std::runtime_error("edge list: no edges found");
    return ArealGraph(max_vertex + 1, std::move(edges));
}

ArealGraph read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("edge list: cannot open " + path);
    return read_edge_list(in);
}

std::vector<int> degree_sorted_order(const ArealGraph& graph) {
    std::vector<int> order(static_cast<std::size_t>(graph.n_regions()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (graph.degree(a) != graph.degree(b)) return graph.degree(a) < graph.degree(b);
        return a < b;
    });
    return order;
}

std::vector<int> random_order(int n, std::uint64_t seed) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t k = order.size() - 1; k > 0; --k) {
        const auto j = static_cast<std::size_t>(rng.uniform_below(k + 1));
        std::swap(order[k], order[j]);
    }
    return order;
}

void DagarSpec::validate() const {
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("DagarSpec: rho must be in [0,1)");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("DagarSpec: sigma2 must be > 0");
}

SparseCholesky build_dagar_factor(const ArealGraph& graph, const DagarSpec& spec) {
    spec.validate();
    const int n = graph.n_regions();
    std::vector<int> position(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) position[static_cast<std::size_t>(graph.order()[static_cast<std::size_t>(k)])] = k;

    SparseCholesky chol;
    chol.neighbors.resize(static_cast<std::size_t>(n));
    chol.b_rows.resize(static_cast<std::size_t>(n));
    chol.f.resize(n);
    for (int k = 0; k < n; ++k) {
        const int region = graph.order()[static_cast<std::size_t>(k)];
        std::vector<int> directed;
        for (int nbr : graph.adjacency()[static_cast<std::size_t>(region)]) {
            const int pos = position[static_cast<std::size_t>(nbr)];
            if (pos < k) directed.push_back(pos);
        }
        std::sort(directed.begin(), directed.end());
        const auto m_before = static_cast<double>(directed.size());
        const double denom = 1.0 + (m_before - 1.0) * spec.rho * spec.rho;
        chol.b_rows[static_cast<std::size_t>(k)].assign(directed.size(), spec.rho / denom);
        chol.neighbors[static_cast<std::size_t>(k)] = std::move(directed);
        chol.f[k] = spec.sigma2 / denom;
    }
    return chol;
}

Eigen::MatrixXd car_precision(const ArealGraph& graph, double rho, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("car_precision: sigma2 must be > 0");
    const Eigen::MatrixXd M =
        Eigen::MatrixXd(graph.degree_vector().asDiagonal()) - rho * graph.adjacency_matrix();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues()[0];
    const double largest = eig.eigenvalues()[eig.eigenvalues().size() - 1];
    if (!(smallest > 1e-12 * std::max(1.0, largest))) {
        std::ostringstream msg;
        msg << "car_precision: D - rho*A is not positive definite at rho = " << rho
            << " (smallest eigenvalue " << smallest << ")";
        throw std::runtime_error(msg.str());
    }
    return M / sigma2;
}

double dagar_loglik(const ArealGraph& graph, const DagarSpec& spec, const Eigen::VectorXd& w) {
    if (w.size() != graph.n_regions())
        throw std::invalid_argument("dagar_loglik: w length != region count");
    const SparseCholesky chol = build_dagar_factor(graph, spec);
    Eigen::VectorXd w_pos(w.size());
    for (int k = 0; k < graph.n_regions(); ++k)
        w_pos[k] = w[graph.order()[static_cast<std::size_t>(k)]];
    const double n = static_cast<double>(graph.n_regions());
    const Eigen::VectorXd u = apply_factor(chol, w_pos);
    return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * log_det(chol) -
           0.5 * u.squaredNorm();
}

Eigen::MatrixXd dagar_covariance(const ArealGraph& graph, const DagarSpec& spec) {
    const Eigen::MatrixXd cov_pos = dense_covariance(build_dagar_factor(graph, spec));
    const int n = graph.n_regions();
    Eigen::MatrixXd cov(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            cov(graph.order()[static_cast<std::size_t>(a)],
                graph.order()[static_cast<std::size_t>(b)]) = cov_pos(a, b);
    return cov;
}

ArealGraph grid_graph(int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid_graph: rows and cols must be >= 1");
    std::vector<std::pair<int, int>> edges;
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
        }
    }
    return ArealGraph(rows * cols, std::move(edges));
}

namespace {

std::vector<std::pair<int, int>> vertex_orbit(int r, int c, int rows, int cols) {
    std::vector<std::pair<int, int>> images{{r, c},
                                            {rows - 1 - r, c},
                                            {r, cols - 1 - c},
                                            {rows - 1 - r, cols - 1 - c}};
    if (rows == cols) {
        const auto base = images;
        for (const auto& [rr, cc] : base) images.emplace_back(cc, rr);
    }
    return images;
}

} // namespace

SymmetryGroups grid_symmetry_groups(int rows, int cols, const ArealGraph& graph) {
    if (graph.n_regions() != rows * cols)
        throw std::invalid_argument("grid_symmetry_groups: graph size != rows*cols");
    SymmetryGroups out;
    out.vertex_group.resize(static_cast<std::size_t>(rows * cols));
    std::map<std::pair<int, int>, int> canon_to_group;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const auto orbit = vertex_orbit(r, c, rows, cols);
            const auto canon = *std::min_element(orbit.begin(), orbit.end());
            const auto [it, inserted] =
                canon_to_group.try_emplace(canon, static_cast<int>(canon_to_group.size()));
            out.vertex_group[static_cast<std::size_t>(r * cols + c)] = it->second;
        }
    }
    out.n_vertex_groups = static_cast<int>(canon_to_group.size());

    using EdgeKey = std::pair<std::pair<int, int>, std::pair<int, int>>;
    std::map<EdgeKey, int> edge_canon_to_group;
    out.edge_group.reserve(graph.edges().size());
    for (const auto& [a, b] : graph.edges()) {
        const auto ia = vertex_orbit(a / cols, a % cols, rows, cols);
        const auto ib = vertex_orbit(b / cols, b % cols, rows, cols);
        EdgeKey canon{{rows, cols}, {rows, cols}}; // sentinel larger than any real key
        for (std::size_t t = 0; t < ia.size(); ++t) {
            auto lo = ia[t];
            auto hi = ib[t];
            if (hi < lo) std::swap(lo, hi);
            canon = std::min(canon, EdgeKey{lo, hi});
        }
        const auto [it, inserted] =
            edge_canon_to_group.try_emplace(canon, static_cast<int>(edge_canon_to_group.size()));
        out.edge_group.push_back(it->second);
    }
    out.n_edge_groups = static_cast<int>(edge_canon_to_group.size());
    return out;
}

GroupStats covariance_group_stats(const Eigen::MatrixXd& cov, const ArealGraph& graph,
                                  const SymmetryGroups& groups) {
    if (cov.rows() != graph.n_regions() || cov.cols() != graph.n_regions())
        throw std::invalid_argument("covariance_group_stats: covariance size mismatch");
    if (groups.vertex_group.size() != static_cast<std::size_t>(graph.n_regions()) ||
        groups.edge_group.size() != graph.edges().size())
        throw std::invalid_argument("covariance_group_stats: group sizes mismatch");

    GroupStats stats;
    stats.vertex_variance.assign(static_cast<std::size_t>(groups.n_vertex_groups), 0.0);
    std::vector<int> vcount(static_cast<std::size_t>(groups.n_vertex_groups), 0);
    for (int v = 0; v < graph.n_regions(); ++v) {
        const auto g = static_cast<std::size_t>(groups.vertex_group[static_cast<std::size_t>(v)]);
        stats.vertex_variance[g] += cov(v, v);
        ++vcount[g];
    }
    for (std::size_t g = 0; g < stats.vertex_variance.size(); ++g)
        stats.vertex_variance[g] /= std::max(vcount[g], 1);

    stats.edge_correlation.assign(static_cast<std::size_t>(groups.n_edge_groups), 0.0);
    std::vector<int> ecount(static_cast<std::size_t>(groups.n_edge_groups), 0);
    for (std::size_t e = 0; e < graph.edges().size(); ++e) {
        const auto [a, b] = graph.edges()[e];
        const auto g = static_cast<std::size_t>(groups.edge_group[e]);
        stats.edge_correlation[g] += cov(a, b) / std::sqrt(cov(a, a) * cov(b, b));
        ++ecount[g];
    }
    for (std::size_t g = 0; g < stats.edge_correlation.size(); ++g)
        stats.edge_correlation[g] /= std::max(ecount[g], 1);
    return stats;
}

std::vector<CarDiagnosticsRow> car_diagnostics(const ArealGraph& graph,
                                               const std::vector<double>& rho_grid,
                                               const SymmetryGroups& groups, double sigma2) {
    std::vector<CarDiagnosticsRow> rows;
    rows.reserve(rho_grid.size());
    for (const double rho : rho_grid) {
        CarDiagnosticsRow row;
        row.rho = rho;
        try {
            const Eigen::MatrixXd prec = car_precision(graph, rho, sigma2);
            const Eigen::MatrixXd cov = prec.llt().solve(
                Eigen::MatrixXd::Identity(graph.n_regions(), graph.n_regions()));
            row.stats = covariance_group_stats(cov, graph, groups);
        } catch (const std::runtime_error&) {
            row.singular = true;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace nngp
