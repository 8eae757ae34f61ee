#include "nngp/sparse_cholesky.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nngp/errors.hpp"
#include "nngp/parallel.hpp"
#include "nngp/rng.hpp"

namespace nngp {

namespace {

void check_length(const SparseCholesky& chol, const Eigen::VectorXd& v, const char* where) {
    if (static_cast<std::size_t>(v.size()) != chol.size()) {
        std::ostringstream msg;
        msg << where << ": vector length " << v.size() << " does not match factor size "
            << chol.size();
        throw std::invalid_argument(msg.str());
    }
}

} // namespace

SparseCholesky identity_factor(std::size_t n) {
    SparseCholesky chol;
    chol.neighbors.assign(n, {});
    chol.b_rows.assign(n, {});
    chol.f = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    return chol;
}

FactorBuilder::FactorBuilder(const LocationSet& locs, const NeighborGraph& graph) {
    if (graph.size() != locs.size())
        throw std::invalid_argument("FactorBuilder: graph size does not match locations");
    const std::size_t n = locs.size();
    neighbors_.resize(n);
    nbr_dist_.resize(n);
    self_dist_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nbrs = graph.neighbors(i);
        const auto k = static_cast<Eigen::Index>(nbrs.size());
        neighbors_[i] = nbrs;
        Eigen::MatrixXd dmat(k, k);
        Eigen::VectorXd dvec(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const Point& pa = locs.ordered(static_cast<std::size_t>(nbrs[static_cast<std::size_t>(a)]));
            dvec[a] = distance(pa, locs.ordered(i));
            dmat(a, a) = 0.0;
            for (Eigen::Index b = a + 1; b < k; ++b) {
                const Point& pb = locs.ordered(static_cast<std::size_t>(nbrs[static_cast<std::size_t>(b)]));
                const double d = distance(pa, pb);
                dmat(a, b) = d;
                dmat(b, a) = d;
            }
        }
        nbr_dist_[i] = std::move(dmat);
        self_dist_[i] = std::move(dvec);
    }
}

SparseCholesky FactorBuilder::build(const CovarianceSpec& spec, FactorTarget target,
                                    unsigned threads) const {
    spec.validate();
    const bool nugget = target == FactorTarget::Response;
    const std::size_t n = size();
    const double marginal = kernel_value(spec, 0.0, nugget);
    const double floor = 1e-12 * marginal;

    SparseCholesky chol;
    chol.neighbors = neighbors_;
    chol.b_rows.resize(n);
    chol.f.resize(static_cast<Eigen::Index>(n));

    parallel_for(n, threads, [&](std::size_t i) {
        const auto k = static_cast<Eigen::Index>(neighbors_[i].size());
        if (k == 0) {
            chol.b_rows[i] = {};
            chol.f[static_cast<Eigen::Index>(i)] = marginal;
            return;
        }
        Eigen::MatrixXd cnn(k, k);
        Eigen::VectorXd cni(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            cnn(a, a) = marginal;
            cni[a] = kernel_value(spec, self_dist_[i][a], nugget);
            for (Eigen::Index b = a + 1; b < k; ++b) {
                const double v = kernel_value(spec, nbr_dist_[i](a, b), nugget);
                cnn(a, b) = v;
                cnn(b, a) = v;
            }
        }
        Eigen::LLT<Eigen::MatrixXd> llt(cnn);
        if (llt.info() != Eigen::Success) {
            std::ostringstream msg;
            msg << "row " << i << ": neighbor covariance is not positive definite";
            throw NonPositiveConditionalVariance(msg.str());
        }
        const Eigen::VectorXd b = llt.solve(cni);
        const double fi = marginal - cni.dot(b);
        if (!(fi > floor)) {
            std::ostringstream msg;
            msg << "row " << i << ": conditional variance " << fi << " below floor " << floor;
            throw NonPositiveConditionalVariance(msg.str());
        }
        chol.b_rows[i].assign(b.data(), b.data() + k);
        chol.f[static_cast<Eigen::Index>(i)] = fi;
    });
    return chol;
}

SparseCholesky build_factor(const LocationSet& locs, const NeighborGraph& graph,
                            const CovarianceSpec& spec, FactorTarget target, unsigned threads) {
    return FactorBuilder(locs, graph).build(spec, target, threads);
}

Eigen::VectorXd apply_factor(const SparseCholesky& chol, const Eigen::VectorXd& v) {
    check_length(chol, v, "apply_factor");
    const auto n = static_cast<Eigen::Index>(chol.size());
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& nbrs = chol.neighbors[static_cast<std::size_t>(i)];
        const auto& b = chol.b_rows[static_cast<std::size_t>(i)];
        double acc = v[i];
        for (std::size_t j = 0; j < nbrs.size(); ++j) acc -= b[j] * v[nbrs[j]];
        u[i] = acc / std::sqrt(chol.f[i]);
    }
    return u;
}

Eigen::VectorXd backsolve_factor(const SparseCholesky& chol, const Eigen::VectorXd& z) {
    check_length(chol, z, "backsolve_factor");
    const auto n = static_cast<Eigen::Index>(chol.size());
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& nbrs = chol.neighbors[static_cast<std::size_t>(i)];
        const auto& b = chol.b_rows[static_cast<std::size_t>(i)];
        double acc = std::sqrt(chol.f[i]) * z[i];
        for (std::size_t j = 0; j < nbrs.size(); ++j) acc += b[j] * y[nbrs[j]];
        y[i] = acc;
    }
    return y;
}

double log_det(const SparseCholesky& chol) {
    return chol.f.array().log().sum();
}

double quad_form(const SparseCholesky& chol, const Eigen::VectorXd& u,
                 const Eigen::VectorXd& v) {
    check_length(chol, u, "quad_form");
    check_length(chol, v, "quad_form");
    return apply_factor(chol, u).dot(apply_factor(chol, v));
}

Eigen::MatrixXd simulate(const SparseCholesky& chol, std::uint64_t seed, int draws,
                         unsigned threads) {
    if (draws < 1) throw std::invalid_argument("simulate: draws must be >= 1");
    const auto n = static_cast<Eigen::Index>(chol.size());
    Eigen::MatrixXd out(n, draws);
    parallel_for(static_cast<std::size_t>(draws), threads, [&](std::size_t d) {
        Rng rng(derive_seed(seed, d));
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
        out.col(static_cast<Eigen::Index>(d)) = backsolve_factor(chol, z);
    });
    return out;
}

Eigen::MatrixXd dense_lower_factor(const SparseCholesky& chol) {
    const auto n = static_cast<Eigen::Index>(chol.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double scale = 1.0 / std::sqrt(chol.f[i]);
        L(i, i) = scale;
        const auto& nbrs = chol.neighbors[static_cast<std::size_t>(i)];
        const auto& b = chol.b_rows[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < nbrs.size(); ++j) L(i, nbrs[j]) = -b[j] * scale;
    }
    return L;
}

Eigen::MatrixXd dense_covariance(const SparseCholesky& chol) {
    const auto n = static_cast<Eigen::Index>(chol.size());
    const Eigen::MatrixXd L = dense_lower_factor(chol);
    const Eigen::MatrixXd Linv =
        L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    return Linv * Linv.transpose();
}

} // namespace nngp
