#include "nngp/covariance.hpp"

#include <cmath>
#include <stdexcept>

namespace nngp {

std::string to_string(KernelFamily family) {
    switch (family) {
    case KernelFamily::Exponential: return "exponential";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Gaussian: return "gaussian";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "exponential") return KernelFamily::Exponential;
    if (name == "matern32") return KernelFamily::Matern32;
    if (name == "gaussian") return KernelFamily::Gaussian;
    throw std::invalid_argument("unknown kernel family: " + name);
}

void CovarianceSpec::validate() const {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("CovarianceSpec: sigma2 must be > 0");
    if (!(phi > 0.0)) throw std::invalid_argument("CovarianceSpec: phi must be > 0");
    if (!(tau2 >= 0.0)) throw std::invalid_argument("CovarianceSpec: tau2 must be >= 0");
}

double kernel_value(const CovarianceSpec& spec, double d, bool include_nugget) {
    if (d < 0.0) throw std::invalid_argument("kernel_value: negative distance");
    double value = 0.0;
    switch (spec.family) {
    case KernelFamily::Exponential:
        value = spec.sigma2 * std::exp(-spec.phi * d);
        break;
    case KernelFamily::Matern32: {
        const double u = spec.phi * d;
        value = spec.sigma2 * (1.0 + u) * std::exp(-u);
        break;
    }
    case KernelFamily::Gaussian: {
        const double u = spec.phi * d;
        value = spec.sigma2 * std::exp(-u * u);
        break;
    }
    }
    if (include_nugget && d == 0.0) value += spec.tau2;
    return value;
}

Eigen::MatrixXd cross_covariance(const CovarianceSpec& spec, std::span<const Point> a,
                                 std::span<const Point> b, bool include_nugget) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("cross_covariance: point lists must be nonempty");
    Eigen::MatrixXd out(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            // identical coordinates give exactly d == 0, which is where the
            // nugget indicator lives
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                kernel_value(spec, distance(a[i], b[j]), include_nugget);
        }
    }
    return out;
}

} // namespace nngp
