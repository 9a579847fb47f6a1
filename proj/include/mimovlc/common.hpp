#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimovlc {

using cplx = std::complex<double>;

/// One bit per element, values 0 or 1, most significant label bit first.
using Bits = std::vector<std::uint8_t>;

/// A per-antenna collection of sample or symbol streams.
using Streams = std::vector<std::vector<cplx>>;

enum class ErrorKind {
    InvalidArgument,
    UnsupportedOrder,
    LengthMismatch,
    DimensionMismatch,
    Aliasing,
    OutOfRange,
    SyncFailure,
    Saturation,
    Outage,
    MalformedFrame,
    Timeout,
    Calibration,
    Io,
    Config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace mimovlc
