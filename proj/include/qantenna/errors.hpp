#pragma once

#include <stdexcept>
#include <string>

namespace qantenna {

// Raised when a computation cannot be trusted: ill-conditioned solves,
// quadrature that does not converge, integrator blow-up.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& operation, const std::string& what,
                     double estimate = 0.0)
        : std::runtime_error(operation + ": " + what), operation_(operation),
          estimate_(estimate) {}

    const std::string& operation() const noexcept { return operation_; }
    double estimate() const noexcept { return estimate_; }

private:
    std::string operation_;
    double estimate_;
};

}  // namespace qantenna
