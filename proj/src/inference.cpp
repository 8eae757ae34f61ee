#include "nngp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nngp/errors.hpp"
#include "nngp/parallel.hpp"

namespace nngp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836; // log(2*pi)

double gaussian_loglik_from_factor(const SparseCholesky& chol, const Eigen::VectorXd& resid_ord) {
    const auto n = static_cast<double>(chol.size());
    const Eigen::VectorXd u = apply_factor(chol, resid_ord);
    return -0.5 * n * kLog2Pi - 0.5 * log_det(chol) - 0.5 * u.squaredNorm();
}

/// beta from the transformed system (LX, Ly); throws SingularDesign when LX
/// is rank deficient.
Eigen::VectorXd gls_solve(const Eigen::MatrixXd& LX, const Eigen::VectorXd& Ly) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(LX);
    if (qr.rank() < LX.cols()) throw SingularDesign("profile_beta: design matrix is rank deficient");
    return qr.solve(Ly);
}

} // namespace

void RegressionData::check_consistent() const {
    const auto n = static_cast<Eigen::Index>(locs.size());
    if (y.size() != n) throw std::invalid_argument("RegressionData: y length != location count");
    if (X.rows() != n) throw std::invalid_argument("RegressionData: X rows != location count");
    if (X.cols() < 1 || X.cols() > n)
        throw std::invalid_argument("RegressionData: need 1 <= p <= n columns");
}

double vecchia_loglik(const RegressionData& data, const NeighborGraph& graph,
                      const CovarianceSpec& spec, const Eigen::VectorXd& beta) {
    data.check_consistent();
    if (beta.size() != data.X.cols())
        throw std::invalid_argument("vecchia_loglik: beta length != X columns");
    const SparseCholesky chol = build_factor(data.locs, graph, spec, FactorTarget::Response);
    const Eigen::VectorXd resid = data.y - data.X * beta;
    return gaussian_loglik_from_factor(chol, data.locs.to_ordered(resid));
}

Eigen::VectorXd profile_beta(const RegressionData& data, const SparseCholesky& chol) {
    data.check_consistent();
    if (chol.size() != data.locs.size())
        throw std::invalid_argument("profile_beta: factor size != data size");
    const Eigen::MatrixXd Xo = data.locs.to_ordered_rows(data.X);
    const Eigen::VectorXd yo = data.locs.to_ordered(data.y);
    Eigen::MatrixXd LX(Xo.rows(), Xo.cols());
    for (Eigen::Index j = 0; j < Xo.cols(); ++j) LX.col(j) = apply_factor(chol, Xo.col(j));
    return gls_solve(LX, apply_factor(chol, yo));
}

namespace {

struct ProfiledObjective {
    const FactorBuilder& builder;
    const Eigen::MatrixXd& Xo; // ordering-aligned design
    const Eigen::VectorXd& yo; // ordering-aligned response
    KernelFamily family;
    unsigned threads;

    // Maximized-over-beta log-likelihood at exp(log-parameters).
    double loglik(const Eigen::Vector3d& logtheta, Eigen::VectorXd* beta_out = nullptr) const {
        CovarianceSpec spec{family, std::exp(logtheta[0]), std::exp(logtheta[1]),
                            std::exp(logtheta[2])};
        SparseCholesky chol;
        try {
            chol = builder.build(spec, FactorTarget::Response, threads);
        } catch (const NonPositiveConditionalVariance&) {
            return -std::numeric_limits<double>::infinity();
        }
        Eigen::MatrixXd LX(Xo.rows(), Xo.cols());
        for (Eigen::Index j = 0; j < Xo.cols(); ++j) LX.col(j) = apply_factor(chol, Xo.col(j));
        const Eigen::VectorXd Ly = apply_factor(chol, yo);
        const Eigen::VectorXd beta = gls_solve(LX, Ly);
        if (beta_out) *beta_out = beta;
        const double n = static_cast<double>(chol.size());
        const double rss = (Ly - LX * beta).squaredNorm();
        return -0.5 * n * kLog2Pi - 0.5 * log_det(chol) - 0.5 * rss;
    }
};

} // namespace

FitResult fit_mle(const RegressionData& data, const NeighborGraph& graph,
                  const CovarianceSpec& init, unsigned threads) {
    data.check_consistent();
    init.validate();

    const FactorBuilder builder(data.locs, graph);
    const Eigen::MatrixXd Xo = data.locs.to_ordered_rows(data.X);
    const Eigen::VectorXd yo = data.locs.to_ordered(data.y);
    const ProfiledObjective objective{builder, Xo, yo, init.family, threads};

    // log-parameter start; a zero nugget is floored so its log stays finite
    Eigen::Vector3d x0(std::log(init.sigma2), std::log(init.phi),
                       std::log(std::max(init.tau2, 1e-10 * init.sigma2)));

    constexpr int kMaxIterations = 500;
    constexpr double kDiameterTol = 1e-6;
    constexpr double kStep = 0.25;

    // Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink 0.5) on
    // the negative profiled log-likelihood.
    struct Vertex {
        Eigen::Vector3d x;
        double value;
    };
    auto eval = [&](const Eigen::Vector3d& x) { return -objective.loglik(x); };

    std::vector<Vertex> simplex;
    simplex.push_back({x0, eval(x0)});
    if (std::isnan(simplex[0].value))
        throw NonFiniteLikelihood("fit_mle: likelihood is NaN at the initial parameters");
    for (int j = 0; j < 3; ++j) {
        Eigen::Vector3d x = x0;
        x[j] += kStep;
        simplex.push_back({x, eval(x)});
    }

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.value < b.value; };
    int iterations = 0;
    bool converged = false;
    for (; iterations < kMaxIterations; ++iterations) {
        std::sort(simplex.begin(), simplex.end(), by_value);
        double diameter = 0.0;
        for (std::size_t v = 1; v < simplex.size(); ++v)
            diameter = std::max(diameter, (simplex[v].x - simplex[0].x).lpNorm<Eigen::Infinity>());
        if (diameter < kDiameterTol) {
            converged = true;
            break;
        }

        const Eigen::Vector3d centroid =
            (simplex[0].x + simplex[1].x + simplex[2].x) / 3.0;
        Vertex& worst = simplex[3];
        const Eigen::Vector3d reflected = centroid + (centroid - worst.x);
        const double fr = eval(reflected);
        if (fr < simplex[0].value) {
            const Eigen::Vector3d expanded = centroid + 2.0 * (centroid - worst.x);
            const double fe = eval(expanded);
            worst = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
        } else if (fr < simplex[2].value) {
            worst = {reflected, fr};
        } else {
            const bool outside = fr < worst.value;
            const Eigen::Vector3d base = outside ? reflected : worst.x;
            const Eigen::Vector3d contracted = centroid + 0.5 * (base - centroid);
            const double fc = eval(contracted);
            if (fc < std::min(fr, worst.value)) {
                worst = {contracted, fc};
            } else {
                for (std::size_t v = 1; v < simplex.size(); ++v) {
                    simplex[v].x = simplex[0].x + 0.5 * (simplex[v].x - simplex[0].x);
                    simplex[v].value = eval(simplex[v].x);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(), by_value);

    FitResult result;
    result.spec = CovarianceSpec{init.family, std::exp(simplex[0].x[0]),
                                 std::exp(simplex[0].x[1]), std::exp(simplex[0].x[2])};
    result.loglik = objective.loglik(simplex[0].x, &result.beta);
    result.converged = converged;
    result.iterations = iterations;
    return result;
}

std::vector<Prediction> krige(std::span<const Point> observed, const Eigen::VectorXd& values,
                              const CovarianceSpec& spec, std::span<const Point> new_points,
                              int m, unsigned threads) {
    spec.validate();
    if (observed.empty()) throw std::invalid_argument("krige: no observed points");
    if (static_cast<std::size_t>(values.size()) != observed.size())
        throw std::invalid_argument("krige: values length != observed count");
    const int k = std::min<int>(m, static_cast<int>(observed.size()));
    if (k < 1) throw std::invalid_argument("krige: m must be >= 1");

    const KdTree tree(std::vector<Point>(observed.begin(), observed.end()));
    const double marginal = kernel_value(spec, 0.0, true);

    std::vector<Prediction> out(new_points.size());
    parallel_for(new_points.size(), threads, [&](std::size_t q) {
        const Point& s0 = new_points[q];
        const std::vector<int> nbrs = tree.nearest(s0, k);
        std::vector<Point> pts(nbrs.size());
        Eigen::VectorXd vals(static_cast<Eigen::Index>(nbrs.size()));
        for (std::size_t a = 0; a < nbrs.size(); ++a) {
            pts[a] = observed[static_cast<std::size_t>(nbrs[a])];
            vals[static_cast<Eigen::Index>(a)] = values[nbrs[a]];
        }
        const Eigen::MatrixXd snn = cross_covariance(spec, pts, pts, true);
        const Eigen::MatrixXd s0n = cross_covariance(spec, std::span<const Point>(&s0, 1), pts, true);
        const Eigen::LLT<Eigen::MatrixXd> llt(snn);
        const Eigen::VectorXd weights = llt.solve(s0n.row(0).transpose());
        const double mean = weights.dot(vals);
        const double variance = marginal - weights.dot(s0n.row(0).transpose());
        out[q] = Prediction{mean, std::max(variance, 0.0)};
    });
    return out;
}

std::vector<Prediction> predict(const RegressionData& data, const FitResult& fit,
                                std::span<const Point> new_locs, const Eigen::MatrixXd& Xnew,
                                int m, unsigned threads) {
    data.check_consistent();
    if (static_cast<std::size_t>(Xnew.rows()) != new_locs.size())
        throw std::invalid_argument("predict: Xnew rows != new location count");
    if (Xnew.cols() != data.X.cols())
        throw std::invalid_argument("predict: Xnew columns != training design columns");

    const Eigen::VectorXd resid = data.y - data.X * fit.beta;
    std::vector<Prediction> out =
        krige(data.locs.input_points(), resid, fit.spec, new_locs, m, threads);
    const Eigen::VectorXd trend = Xnew * fit.beta;
    for (std::size_t q = 0; q < out.size(); ++q)
        out[q].mean += trend[static_cast<Eigen::Index>(q)];
    return out;
}

} // namespace nngp
