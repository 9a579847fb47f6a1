#include "mimovlc/common.hpp"

namespace mimovlc {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::UnsupportedOrder: return "unsupported_order";
    case ErrorKind::LengthMismatch: return "length_mismatch";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::Aliasing: return "aliasing";
    case ErrorKind::OutOfRange: return "out_of_range";
    case ErrorKind::SyncFailure: return "sync_failure";
    case ErrorKind::Saturation: return "saturation";
    case ErrorKind::Outage: return "outage";
    case ErrorKind::MalformedFrame: return "malformed_frame";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Calibration: return "calibration";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
    }
    return "unknown";
}

} // namespace mimovlc
