#include "scatterbench/errors.hpp"

namespace sb {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::InvalidModeRange: return "InvalidModeRange";
    case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::BoxMismatch: return "BoxMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace sb
