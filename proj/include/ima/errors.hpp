#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ima {

// Base of every error the engine raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A function was called with arguments outside its domain.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

enum class BackendErrorKind { transient, permanent };

class BackendError : public Error {
public:
    BackendError(BackendErrorKind kind, const std::string& what, int status = 0)
        : Error(what), kind_(kind), status_(status) {}

    BackendErrorKind kind() const noexcept { return kind_; }
    // HTTP status when one was received, otherwise 0.
    int status() const noexcept { return status_; }

private:
    BackendErrorKind kind_;
    int status_;
};

// The scripted backend ran out of responses for a queue.
class ScriptExhausted : public BackendError {
public:
    explicit ScriptExhausted(const std::string& queue)
        : BackendError(BackendErrorKind::permanent, "scripted response queue exhausted: " + queue),
          queue_(queue) {}

    const std::string& queue() const noexcept { return queue_; }

private:
    std::string queue_;
};

class SchedulerError : public Error {
public:
    using Error::Error;
};

enum class ParseErrorKind { missing, range, shape };

class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
    ParseErrorKind kind() const noexcept { return kind_; }

private:
    ParseErrorKind kind_;
};

struct Diagnostic {
    std::string path;  // JSON-pointer style location, "" for the document root
    std::string message;
};

class LoadError : public Error {
public:
    LoadError(const std::string& source, std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

class PersistError : public Error {
public:
    using Error::Error;
};

}  // namespace ima
