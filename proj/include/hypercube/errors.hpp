#pragma once

#include <stdexcept>
#include <string>

namespace hypercube {

// Error categories map 1:1 onto CLI exit codes: usage=1, data=2, backend=3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 2; }
};

// Bad invocation: missing flags, invalid parameter combinations.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
    int exit_code() const override { return 1; }
};

// Malformed or inconsistent input data (corpus files, schemas, indexes).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
    int exit_code() const override { return 2; }
};

// Failure of an external backend (LLM endpoint, embedder, scripted replay).
class BackendError : public Error {
public:
    explicit BackendError(const std::string& msg, bool retryable = false)
        : Error(msg), retryable_(retryable) {}
    int exit_code() const override { return 3; }
    bool retryable() const { return retryable_; }

private:
    bool retryable_ = false;
};

// A backend replied, but the reply did not follow the expected format.
// Keeps the raw reply so callers can log or inspect it.
class ReplyParseError : public BackendError {
public:
    ReplyParseError(const std::string& msg, std::string raw_reply)
        : BackendError(msg), raw_reply_(std::move(raw_reply)) {}
    const std::string& raw_reply() const { return raw_reply_; }

private:
    std::string raw_reply_;
};

}  // namespace hypercube
