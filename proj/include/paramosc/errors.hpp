#pragma once

#include <stdexcept>
#include <string>

namespace paramosc {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Step size underflow, non-finite state, or an unnormalizable Gaussian width.
class IntegrationFailure : public Error {
public:
    using Error::Error;
};

/// Norm drift beyond SimConfig::norm_tol. The state is never silently rescaled.
class UnitarityViolation : public Error {
public:
    using Error::Error;
};

class QuadratureNonConvergence : public Error {
public:
    using Error::Error;
};

/// r = eps_bar / h requested with h == 0.
class UndefinedRatio : public Error {
public:
    using Error::Error;
};

class InsufficientPoints : public Error {
public:
    using Error::Error;
};

class DegenerateFit : public Error {
public:
    using Error::Error;
};

class NoCrossing : public Error {
public:
    using Error::Error;
};

/// Short type name for reporting, e.g. in sweep error rows.
inline std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const UndefinedRatio*>(&e)) return "UndefinedRatio";
    if (dynamic_cast<const IntegrationFailure*>(&e)) return "IntegrationFailure";
    if (dynamic_cast<const UnitarityViolation*>(&e)) return "UnitarityViolation";
    if (dynamic_cast<const QuadratureNonConvergence*>(&e)) return "QuadratureNonConvergence";
    if (dynamic_cast<const InsufficientPoints*>(&e)) return "InsufficientPoints";
    if (dynamic_cast<const DegenerateFit*>(&e)) return "DegenerateFit";
    if (dynamic_cast<const NoCrossing*>(&e)) return "NoCrossing";
    if (dynamic_cast<const InvalidParameter*>(&e)) return "InvalidParameter";
    return "Error";
}

} // namespace paramosc
