#pragma once

#include <stdexcept>
#include <string>

namespace prcot {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid domain object or input file (bad config, duplicate ids, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Prompt template rendering failed (missing/disallowed placeholder, degenerate input).
class RenderError : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation contract (e.g. synthesis with zero critiques).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Completion backend failure (network, HTTP, malformed response).
class BackendError : public Error {
public:
    using Error::Error;
};

/// Replay store has no recorded response for the requested cache key.
class ReplayMissError : public BackendError {
public:
    using BackendError::BackendError;
};

/// The backend returned an empty completion.
class EmptyOutputError : public BackendError {
public:
    using BackendError::BackendError;
};

/// Transcript could not be scored (missing gold label, unknown task id).
class ScoringError : public Error {
public:
    using Error::Error;
};

/// Judge reply had no parseable verdict after the re-ask.
class JudgeParseError : public Error {
public:
    using Error::Error;
};

/// Usage summary requested for a method with no ledger entries.
class EmptySummaryError : public Error {
public:
    using Error::Error;
};

}  // namespace prcot
