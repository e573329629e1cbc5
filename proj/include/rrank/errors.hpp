#pragma once

#include <stdexcept>
#include <string>

namespace rrank {

// Error taxonomy mirrors the CLI exit-code contract:
//   UsageError -> 2, DataError -> 3, BackendError (and ParseError) -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad invocation that CLI11 itself cannot catch (conflicting flags, etc).
struct UsageError : Error {
    using Error::Error;
};

// Malformed input files, dimension mismatches, contract violations on data.
struct DataError : Error {
    using Error::Error;
};

// Transport-level or hard LLM-backend failure.
struct BackendError : Error {
    using Error::Error;
};

// Backend replied, but the reply is not interpretable (e.g. no scores).
struct ParseError : BackendError {
    using BackendError::BackendError;
};

}  // namespace rrank
