#pragma once

#include <stdexcept>
#include <string>

namespace exsieve {

// A requested computation exceeds a documented scan/memory ceiling.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An argument is outside the mathematical domain of the operation.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A stated precondition was violated (e.g. incomplete prime seed list).
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A binary image cache failed validation (magic, version, truncation).
struct CacheError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace exsieve
