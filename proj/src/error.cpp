#include "hopchain/error.hpp"

namespace hopchain {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "parse";
        case ErrorKind::DuplicateId: return "duplicate-id";
        case ErrorKind::Format: return "format";
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::SetMismatch: return "set-mismatch";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace hopchain
