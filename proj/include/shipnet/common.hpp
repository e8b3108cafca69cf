#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace shipnet {

// All engine time is integer microseconds. Virtual time starts at 0;
// real-time engines count from their own start instant.
using Micros = std::chrono::microseconds;
using SimTime = Micros;

using Bytes = std::vector<std::uint8_t>;

inline constexpr double to_seconds(Micros t) { return static_cast<double>(t.count()) * 1e-6; }

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class BindFailure : public Error {
public:
    using Error::Error;
};

// FNV-1a, used for delivery-log digests and scenario hashes.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

inline std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = kFnvOffset) {
    return fnv1a(s.data(), s.size(), h);
}

std::string hex64(std::uint64_t v);

inline constexpr const char* kToolVersion = "0.3.0";

}  // namespace shipnet
