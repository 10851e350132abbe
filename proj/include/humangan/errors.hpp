// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exception types shared across the library. Every error thrown by the
// library derives from humangan::Error so callers (the CLI in particular)
// can map categories onto exit codes.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace humangan {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions, invalid sizes, bad configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input files (CSV, checkpoints, config).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Argument outside an operation's documented domain.
class ValidationError : public Error {
public:
    using Error::Error;
};

class InitializationError : public Error {
public:
    InitializationError(const std::string& what, std::size_t attempts)
        : Error(what), attempts_(attempts) {}
    std::size_t attempts() const { return attempts_; }

private:
    std::size_t attempts_;
};

/// A query batch lacks responses (or has duplicates) for some query ids.
class IncompleteBatchError : public Error {
public:
    IncompleteBatchError(const std::string& what, std::vector<std::string> missing)
        : Error(what), missing_(std::move(missing)) {}
    const std::vector<std::string>& missing() const { return missing_; }

private:
    std::vector<std::string> missing_;
};

/// Non-finite loss or parameters during training.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

class DegenerateSpectrumError : public Error {
public:
    using Error::Error;
};

class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// A batch overlapping an unresolved batch of the same iteration.
class ConflictError : public Error {
public:
    using Error::Error;
};

/// Unknown session.
class AuthError : public Error {
public:
    using Error::Error;
};

/// Submission for a query that is not assigned to the session, or already answered.
class RejectedError : public Error {
public:
    using Error::Error;
};

/// Training stopped because the discriminator source could not complete a
/// batch; state up to the last completed iteration is checkpointed.
class TrainingSuspended : public Error {
public:
    TrainingSuspended(const std::string& what, std::size_t completed_iterations)
        : Error(what), completed_(completed_iterations) {}
    std::size_t completed_iterations() const { return completed_; }

private:
    std::size_t completed_;
};

std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 20);

}  // namespace humangan
