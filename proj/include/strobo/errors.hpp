#pragma once

#include <stdexcept>
#include <string>

namespace strobo {

/// Integration, root-finding or fitting failed to produce a trustworthy number.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Top Fock level population exceeded the truncation threshold.
class TruncationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace strobo
