#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nngp/covariance.hpp"
#include "nngp/geometry.hpp"

namespace nngp {

/// Whether a factor targets the noise-free covariance C or the
/// noise-inclusive covariance C + tau2 * I.
enum class FactorTarget { Latent, Response };

/// Row-sparse lower-triangular factor L = F^{-1/2} (I - B). Row i carries the
/// regression coefficients b_rows[i] on its neighbor set plus the conditional
/// variance f[i]; the implied covariance is (I - B)^{-1} F (I - B)^{-T}.
struct SparseCholesky {
    std::vector<std::vector<int>> neighbors;  // earlier-position indices, ascending
    std::vector<std::vector<double>> b_rows;  // coefficients aligned with neighbors
    Eigen::VectorXd f;                        // conditional variances, all > 0

    std::size_t size() const { return static_cast<std::size_t>(f.size()); }
};

/// Factor with B = 0 and F = I; apply/backsolve become the identity map.
SparseCholesky identity_factor(std::size_t n);

/// Caches the per-row neighbor distance geometry so that factors at many
/// parameter values can be built without recomputing distances. Storage is
/// O(n m^2); no n-by-n object is ever formed.
class FactorBuilder {
public:
    FactorBuilder(const LocationSet& locs, const NeighborGraph& graph);

    std::size_t size() const { return self_dist_.size(); }

    SparseCholesky build(const CovarianceSpec& spec, FactorTarget target,
                         unsigned threads = 1) const;

private:
    std::vector<std::vector<int>> neighbors_;
    std::vector<Eigen::MatrixXd> nbr_dist_;  // pairwise distances within each neighbor set
    std::vector<Eigen::VectorXd> self_dist_; // neighbor-to-row distances
};

/// Conditional-regression factor of the NNGP covariance on the graph's
/// sparsity pattern: b_i = C(N_i,N_i)^{-1} C(N_i, s_i),
/// f_i = C(s_i,s_i) - C(s_i,N_i) b_i, with C nugget-free for Latent and
/// nugget-inclusive for Response.
SparseCholesky build_factor(const LocationSet& locs, const NeighborGraph& graph,
                            const CovarianceSpec& spec, FactorTarget target,
                            unsigned threads = 1);

/// u = L v in O(nm).
Eigen::VectorXd apply_factor(const SparseCholesky& chol, const Eigen::VectorXd& v);

/// Solves L y = z by forward substitution over the sparse rows; inverse of
/// apply_factor.
Eigen::VectorXd backsolve_factor(const SparseCholesky& chol, const Eigen::VectorXd& z);

/// log det of the implied covariance: sum of log f_i.
double log_det(const SparseCholesky& chol);

/// u' Ctilde^{-1} v = (Lu)'(Lv).
double quad_form(const SparseCholesky& chol, const Eigen::VectorXd& u,
                 const Eigen::VectorXd& v);

/// Seed-deterministic draws from N(0, Ctilde): each column back-solves an iid
/// standard-normal vector generated from derive_seed(seed, draw).
Eigen::MatrixXd simulate(const SparseCholesky& chol, std::uint64_t seed, int draws,
                         unsigned threads = 1);

/// Dense assembly of L; diagnostic for small n.
Eigen::MatrixXd dense_lower_factor(const SparseCholesky& chol);

/// Dense (I - B)^{-1} F (I - B)^{-T}; diagnostic for small n.
Eigen::MatrixXd dense_covariance(const SparseCholesky& chol);

} // namespace nngp
