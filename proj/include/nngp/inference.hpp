#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nngp/covariance.hpp"
#include "nngp/geometry.hpp"
#include "nngp/sparse_cholesky.hpp"

namespace nngp {

/// Response vector and design matrix aligned row-for-row with the input
/// order of locs (not the Vecchia ordering).
struct RegressionData {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    LocationSet locs;

    void check_consistent() const;
};

struct FitResult {
    Eigen::VectorXd beta;
    CovarianceSpec spec;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Nearest-neighbor Gaussian log-likelihood of y ~ N(X beta, Sigma) under the
/// response-target factor on the graph.
double vecchia_loglik(const RegressionData& data, const NeighborGraph& graph,
                      const CovarianceSpec& spec, const Eigen::VectorXd& beta);

/// GLS estimate (X' Ctilde^{-1} X)^{-1} X' Ctilde^{-1} y under the supplied
/// response factor; the argmax of vecchia_loglik in beta for fixed spec.
Eigen::VectorXd profile_beta(const RegressionData& data, const SparseCholesky& chol);

/// Maximizes the Vecchia log-likelihood over (log sigma2, log phi, log tau2)
/// by Nelder-Mead with beta profiled out at every evaluation. Stops when the
/// simplex diameter in log-parameter space falls below 1e-6 or after 500
/// iterations.
FitResult fit_mle(const RegressionData& data, const NeighborGraph& graph,
                  const CovarianceSpec& init, unsigned threads = 1);

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Zero-mean nearest-neighbor kriging of observed values at new points,
/// using the nugget-inclusive covariance. Predictions are independent across
/// new points.
std::vector<Prediction> krige(std::span<const Point> observed,
                              const Eigen::VectorXd& values, const CovarianceSpec& spec,
                              std::span<const Point> new_points, int m,
                              unsigned threads = 1);

/// Response-level universal kriging at new locations with the fitted
/// parameters: mean x0'beta + local kriging of the residuals, variance from
/// the m nearest observed locations. m is clipped to n.
std::vector<Prediction> predict(const RegressionData& data, const FitResult& fit,
                                std::span<const Point> new_locs,
                                const Eigen::MatrixXd& Xnew, int m,
                                unsigned threads = 1);

} // namespace nngp
