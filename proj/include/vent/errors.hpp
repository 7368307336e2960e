#ifndef VENT_ERRORS_HPP
#define VENT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vent {

// Bad user-supplied configuration or arguments. CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A required input file is absent. CLI exit code 3.
struct MissingInputError : std::runtime_error {
    explicit MissingInputError(const std::string& msg) : std::runtime_error(msg) {}
};

// On-disk data is malformed: bad magic, version, truncation, CRC. CLI exit code 4.
struct DataFormatError : std::runtime_error {
    enum class Kind { bad_magic, bad_version, truncated, crc_mismatch, malformed };
    Kind kind;
    long byte_offset;  // -1 when not applicable
    DataFormatError(Kind k, const std::string& msg, long offset = -1)
        : std::runtime_error(msg), kind(k), byte_offset(offset) {}
};

// Violated in-process contract (shape mismatch, cyclic graph, ...).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Numeric failure during optimization (NaN loss). CLI exit code 5.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace vent

#endif
