#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nngp/inference.hpp"

namespace nngp {

/// Refitted parameter draws psi = (beta..., sigma2, phi, tau2) and their
/// percentile intervals. Replicates that failed to converge are excluded
/// from estimates and counted in failures.
struct BootstrapResult {
    Eigen::MatrixXd estimates; // successful replicates x q
    std::vector<std::pair<double, double>> intervals;
    std::vector<std::string> parameter_names;
    int requested = 0;
    int failures = 0;
    double level = 0.0;
    std::uint64_t seed = 0;
};

/// Decorrelated residuals r = L_y (y - X beta_hat), aligned with the Vecchia
/// ordering; approximately iid N(0,1) under the fitted model.
Eigen::VectorXd decorrelate(const RegressionData& data, const FitResult& fit,
                            const NeighborGraph& graph);

/// Inverse map of decorrelate: y = X beta_hat + L_y^{-1} r, returned in input
/// row order. recorrelate(decorrelate(y)) == y.
Eigen::VectorXd recorrelate(const RegressionData& data, const FitResult& fit,
                            const NeighborGraph& graph, const Eigen::VectorXd& r);

/// One bootstrap response: resamples the entries of r iid with replacement
/// (seed-deterministic) and re-correlates through the sparse back-solve.
Eigen::VectorXd make_bootstrap_dataset(const RegressionData& data, const FitResult& fit,
                                       const NeighborGraph& graph, const Eigen::VectorXd& r,
                                       std::uint64_t resample_seed);

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double q);

/// Full percentile bootstrap: B resampled datasets, each refit by fit_mle
/// initialized at the original fit; replicates are order-independent given
/// the seed and may run in parallel.
BootstrapResult run_bootstrap(const RegressionData& data, const NeighborGraph& graph,
                              const FitResult& fit, int B, double level,
                              std::uint64_t seed, unsigned threads = 1);

} // namespace nngp
