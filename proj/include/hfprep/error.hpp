#pragma once

#include <stdexcept>
#include <string>

namespace hfprep {

// Base error for everything this library throws on its own behalf.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input containers, bad headers, truncated payloads.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, size_t byte_offset)
        : Error(msg + " (at byte " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    size_t offset;
};

// Invalid arguments, shape mismatches, violated preconditions.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// External command failures (encoder, decoder, metric).
class SubprocessError : public Error {
public:
    explicit SubprocessError(const std::string& msg) : Error(msg) {}
};

} // namespace hfprep
