#pragma once

#include <stdexcept>
#include <string>

namespace qflow {

/// Malformed input: bad files, inconsistent graphs, infeasible flows handed to an API.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver could not produce a valid answer (iteration limits, internal inconsistencies).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qflow
