#ifndef LLGEO_COMMON_HPP
#define LLGEO_COMMON_HPP

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace llgeo {

using Point = Eigen::Vector2d;

// Invalid user-supplied configuration (bad flag combination, bad scenario
// field, malformed split fraction). CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Filesystem-level failure: missing file, unreadable path, write failure.
// CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed content in an otherwise readable file. line_number is 1-based;
// 0 means the error is not tied to a specific line. CLI exit code 2.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : std::runtime_error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_number(line) {}
    std::size_t line_number;
};

// A query cannot be answered at all: no reading matches any table and no
// antenna position is available for the fallback. CLI exit code 3.
class NoInformationError : public std::runtime_error {
public:
    explicit NoInformationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Fewer usable observations than the method's minimum (TL needs 3
// non-collinear anchors; a degenerate split leaves an empty train set).
// CLI exit code 3.
class InsufficientObservationsError : public std::runtime_error {
public:
    explicit InsufficientObservationsError(const std::string& msg)
        : std::runtime_error(msg) {}
};

// splitmix64: used only to decorrelate (seed, stream) pairs before seeding
// the main mt19937_64 engines, so per-repetition and per-sample streams are
// independent of each other and of evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

// Shortest round-trip decimal form. Every double the project writes to a
// file goes through here so that rereading and rewriting is byte-stable.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, std::size_t line, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(std::string("bad ") + what + ": '" + std::string(s) + "'", line);
    return v;
}

inline long long parse_int(std::string_view s, std::size_t line, const char* what) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(std::string("bad ") + what + ": '" + std::string(s) + "'", line);
    return v;
}

}  // namespace llgeo

#endif
