#pragma once

#include <stdexcept>
#include <string>

namespace nngp {

/// Two input locations share identical coordinates.
class DuplicateLocation : public std::invalid_argument {
public:
    explicit DuplicateLocation(const std::string& what) : std::invalid_argument(what) {}
};

/// A conditional variance fell below the numerical floor while building a
/// sparse factor; the kernel/geometry combination is ill-conditioned.
class NonPositiveConditionalVariance : public std::runtime_error {
public:
    explicit NonPositiveConditionalVariance(const std::string& what) : std::runtime_error(what) {}
};

/// The design matrix is rank deficient.
class SingularDesign : public std::runtime_error {
public:
    explicit SingularDesign(const std::string& what) : std::runtime_error(what) {}
};

/// The likelihood evaluated to NaN at the optimizer's starting point.
class NonFiniteLikelihood : public std::runtime_error {
public:
    explicit NonFiniteLikelihood(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nngp
