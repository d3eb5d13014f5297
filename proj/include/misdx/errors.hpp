#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace misdx {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// The byte stream is not well-formed XML at the stream level. Record-level
// problems (a citation missing its PMID or title) are never reported this
// way; they are skipped and counted instead.
class XmlParseError : public Error {
public:
    XmlParseError(const std::string& what, std::uint64_t byte_offset)
        : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::uint64_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::uint64_t byte_offset_;
};

// A dictionary, relations, or checkpoint file failed validation.
class LoadError : public Error {
public:
    LoadError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

    explicit LoadError(const std::string& what) : Error(what), line_(0) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace misdx
