#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

#include "nngp/geometry.hpp"

namespace nngp {

enum class KernelFamily { Exponential, Matern32, Gaussian };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Stationary covariance: marginal variance sigma2, decay rate phi, iid
/// nugget tau2 added at zero distance only.
struct CovarianceSpec {
    KernelFamily family = KernelFamily::Exponential;
    double sigma2 = 1.0;
    double phi = 1.0;
    double tau2 = 0.0;

    void validate() const;
};

/// C(d) for the spec's family; adds tau2 iff include_nugget and d == 0.
double kernel_value(const CovarianceSpec& spec, double d, bool include_nugget);

/// Matrix of kernel values between two point lists. The nugget lands only on
/// entries whose two points are the identical coordinate pair.
Eigen::MatrixXd cross_covariance(const CovarianceSpec& spec, std::span<const Point> a,
                                 std::span<const Point> b, bool include_nugget);

} // namespace nngp
