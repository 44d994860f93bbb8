#pragma once

#include <stdexcept>
#include <string>

namespace ctlive {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SourceSpan {
    std::string file;
    int line = 1;
    int col_begin = 1;
    int col_end = 1;

    std::string str() const;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, SourceSpan span);
    const SourceSpan& span() const { return span_; }
    const std::string& bare_message() const { return bare_; }

private:
    std::string bare_;
    SourceSpan span_;
};

class UnsupportedConstruct : public SyntaxError {
public:
    using SyntaxError::SyntaxError;
};

class UnknownModule : public Error {
public:
    using Error::Error;
};

class CyclicInstantiation : public Error {
public:
    using Error::Error;
};

/// A continuous assignment network that never settles within one cycle.
class CombinationalLoop : public Error {
public:
    using Error::Error;
};

/// A branch condition evaluated to the unknown value; the run is aborted.
class GuardUnknown : public Error {
public:
    using Error::Error;
};

class NoEnabledStep : public Error {
public:
    NoEnabledStep() : Error("no enabled step") {}
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class NotTTrace : public Error {
public:
    using Error::Error;
};

class DomainTooLarge : public Error {
public:
    using Error::Error;
};

class SolverUnavailable : public Error {
public:
    using Error::Error;
};

}  // namespace ctlive
