#pragma once

#include <stdexcept>
#include <string>

namespace srlaser {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter outside its admissible range.
struct DomainError : Error {
    using Error::Error;
};

// A numerical routine failed to converge or produced an inconsistent result.
struct SolverError : Error {
    using Error::Error;
};

// Step-size control collapsed; `component` names the state variable that
// dominated the local error when it happened.
struct StiffnessError : SolverError {
    StiffnessError(const std::string& msg, std::string comp)
        : SolverError(msg), component(std::move(comp)) {}
    std::string component;
};

// Config file or override string rejected.
struct ConfigError : Error {
    using Error::Error;
};

// No pump window with collective emission exists for the given atom number.
struct NoCollectiveRegion : Error {
    using Error::Error;
};

// Requested Hilbert space exceeds the hard dimension cap.
struct SizeError : Error {
    using Error::Error;
};

}  // namespace srlaser
