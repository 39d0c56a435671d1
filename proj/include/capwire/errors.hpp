#pragma once

#include <stdexcept>
#include <string>

namespace capwire {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration (empty roster in strict mode, malformed
// endpoint string, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Caller-supplied data failed validation (metadata fields, roster invariants,
// unreadable image payloads, ...).
struct InputError : Error {
    using Error::Error;
};

// Filesystem problem: missing file, unwritable path.
struct IoError : Error {
    using Error::Error;
};

// A call to an external backend (LVLM endpoint, remote annotator, embedding
// service) failed. `retriable` separates transient transport failures from
// permanent ones such as 4xx responses or protocol violations.
struct BackendError : Error {
    BackendError(const std::string& what, bool retriable_)
        : Error(what), retriable(retriable_) {}

    bool retriable = false;
};

}  // namespace capwire
