#pragma once

#include <stdexcept>
#include <string>

namespace lmrl {

// Error taxonomy used across the library. Everything derives from Error so
// callers (notably the CLI) can catch one type and map it to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor shapes do not line up for an operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A configuration value is invalid (bad mode string, even kernel size, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// API misuse (backward on a non-scalar, backward twice on a freed graph).
class UsageError : public Error {
public:
    using Error::Error;
};

// Bad input data: unreadable files, malformed annotations, invalid counts.
class DataError : public Error {
public:
    using Error::Error;
};

// Synthetic generation cannot satisfy the request (cycles do not fit).
class GenerationError : public Error {
public:
    using Error::Error;
};

// Training-time failures (non-finite gradients or losses).
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace lmrl
