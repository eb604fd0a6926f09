#ifndef QMAB_ERRORS_HPP
#define QMAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qmab {

// A caller broke a documented precondition (dimension mismatch, non-unit vector, ...).
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Input data was rejected before any work was done (non-finite entries, ...).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PsdViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A physical model produced an impossible quantity, e.g. a Born probability outside [0, 1].
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ContractError(message);
    }
}

}  // namespace qmab

#endif
