#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace riskdp {

/// Raised when an operation receives a model that fails validation.
/// Carries the full violation list so callers can report every problem at once.
class InvalidModel : public std::invalid_argument {
public:
    explicit InvalidModel(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// An enumeration would exceed its configured size limit.
class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace riskdp
