#include "nngp/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nngp/parallel.hpp"
#include "nngp/rng.hpp"

namespace nngp {

Eigen::VectorXd decorrelate(const RegressionData& data, const FitResult& fit,
                            const NeighborGraph& graph) {
    data.check_consistent();
    if (fit.beta.size() != data.X.cols())
        throw std::invalid_argument("decorrelate: beta length != X columns");
    const SparseCholesky chol = build_factor(data.locs, graph, fit.spec, FactorTarget::Response);
    const Eigen::VectorXd resid = data.y - data.X * fit.beta;
    return apply_factor(chol, data.locs.to_ordered(resid));
}

Eigen::VectorXd recorrelate(const RegressionData& data, const FitResult& fit,
                            const NeighborGraph& graph, const Eigen::VectorXd& r) {
    data.check_consistent();
    const SparseCholesky chol = build_factor(data.locs, graph, fit.spec, FactorTarget::Response);
    const Eigen::VectorXd correlated = data.locs.to_input(backsolve_factor(chol, r));
    return data.X * fit.beta + correlated;
}

namespace {

// Draws iid with replacement from the centered entries of r. Centering keeps
// the conditional bootstrap mean at X beta_hat; the raw mean of r would
// otherwise leak into every dataset through the back-solve.
Eigen::VectorXd resample_with_replacement(const Eigen::VectorXd& r, std::uint64_t seed) {
    Rng rng(seed);
    const double center = r.mean();
    Eigen::VectorXd out(r.size());
    const auto n = static_cast<std::uint64_t>(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i)
        out[i] = r[static_cast<Eigen::Index>(rng.uniform_below(n))] - center;
    return out;
}

} // namespace

Eigen::VectorXd make_bootstrap_dataset(const RegressionData& data, const FitResult& fit,
                                       const NeighborGraph& graph, const Eigen::VectorXd& r,
                                       std::uint64_t resample_seed) {
    if (static_cast<std::size_t>(r.size()) != data.locs.size())
        throw std::invalid_argument("make_bootstrap_dataset: r length != data size");
    return recorrelate(data, fit, graph, resample_with_replacement(r, resample_seed));
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("empirical_quantile: q outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double w = h - static_cast<double>(lo);
    return values[lo] + w * (values[lo + 1] - values[lo]);
}

BootstrapResult run_bootstrap(const RegressionData& data, const NeighborGraph& graph,
                              const FitResult& fit, int B, double level, std::uint64_t seed,
                              unsigned threads) {
    data.check_consistent();
    if (B < 2) throw std::invalid_argument("run_bootstrap: B must be >= 2");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("run_bootstrap: level must be in (0,1)");

    const auto p = data.X.cols();
    const auto q = p + 3;

    // The response factor is identical for every replicate; build it once.
    const SparseCholesky chol = build_factor(data.locs, graph, fit.spec, FactorTarget::Response);
    const Eigen::VectorXd resid = data.y - data.X * fit.beta;
    const Eigen::VectorXd r = apply_factor(chol, data.locs.to_ordered(resid));
    const Eigen::VectorXd trend = data.X * fit.beta;

    Eigen::MatrixXd draws(B, q);
    std::vector<char> ok(static_cast<std::size_t>(B), 0);
    parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
        const Eigen::VectorXd rb = resample_with_replacement(r, derive_seed(seed, b));
        RegressionData boot{trend + data.locs.to_input(backsolve_factor(chol, rb)), data.X,
                            data.locs};
        try {
            const FitResult refit = fit_mle(boot, graph, fit.spec, 1);
            if (!refit.converged || !std::isfinite(refit.loglik)) return;
            const auto row = static_cast<Eigen::Index>(b);
            draws.row(row).head(p) = refit.beta.transpose();
            draws(row, p) = refit.spec.sigma2;
            draws(row, p + 1) = refit.spec.phi;
            draws(row, p + 2) = refit.spec.tau2;
            ok[b] = 1;
        } catch (const std::exception&) {
            // recorded as a failed replicate below
        }
    });

    BootstrapResult result;
    result.requested = B;
    result.level = level;
    result.seed = seed;
    const auto successes =
        static_cast<Eigen::Index>(std::count(ok.begin(), ok.end(), static_cast<char>(1)));
    result.failures = B - static_cast<int>(successes);
    if (successes < 2)
        throw std::runtime_error("run_bootstrap: fewer than two replicates converged");

    result.estimates.resize(successes, q);
    Eigen::Index row = 0;
    for (int b = 0; b < B; ++b)
        if (ok[static_cast<std::size_t>(b)]) result.estimates.row(row++) = draws.row(b);

    for (Eigen::Index j = 0; j < p; ++j)
        result.parameter_names.push_back("beta_" + std::to_string(j));
    result.parameter_names.insert(result.parameter_names.end(), {"sigma2", "phi", "tau2"});

    const double alpha = (1.0 - level) / 2.0;
    for (Eigen::Index j = 0; j < q; ++j) {
        std::vector<double> column(result.estimates.col(j).data(),
                                   result.estimates.col(j).data() + successes);
        const double lower = empirical_quantile(column, alpha);
        const double upper = empirical_quantile(std::move(column), 1.0 - alpha);
        result.intervals.emplace_back(lower, upper);
    }
    return result;
}

} // namespace nngp
