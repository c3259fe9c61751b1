#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rslope {

/// Two operands whose lengths or shapes must agree do not.
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A weight list violates the sorted-L1 invariants. `index()` is the first
/// offending position (0-based).
class InvalidWeights : public std::invalid_argument {
public:
    InvalidWeights(const std::string& what, std::size_t index)
        : std::invalid_argument(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Configuration rejected; the message carries the location when known.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The optimality certificate is not defined at the given point.
class DegenerateCertificate : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline void require_same_size(std::size_t a, std::size_t b, const char* what)
{
    if (a != b)
        throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) + " vs " +
                                std::to_string(b));
}

} // namespace rslope
