#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ellipsis {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A record line that could not be parsed. `offset` is the byte position in
/// the line where parsing stopped.
class MalformedRecord : public Error {
public:
    MalformedRecord(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), detail_(what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t offset_;
};

class InvariantViolation : public Error {
public:
    using Error::Error;
};

// Template file errors.
class CountMismatch : public Error {
public:
    using Error::Error;
};
class MalformedEntry : public Error {
public:
    using Error::Error;
};

// Automaton construction errors.
class DuplicateName : public Error {
public:
    using Error::Error;
};
class PrefixConflict : public Error {
public:
    using Error::Error;
};

class OutOfOrderTimestamp : public Error {
public:
    OutOfOrderTimestamp(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class NoMatchingInstances : public Error {
public:
    using Error::Error;
};

class SpecInvalid : public Error {
public:
    using Error::Error;
};

class UnknownTemplate : public Error {
public:
    using Error::Error;
};
class RepInvalid : public Error {
public:
    using Error::Error;
};

class RetentionViolation : public Error {
public:
    RetentionViolation(const std::string& what, std::size_t index)
        : Error(what + " (record " + std::to_string(index) + ")"), index_(index) {}
    /// Index into the original stream of the first record that diverged.
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace ellipsis
