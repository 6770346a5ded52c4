#pragma once

#include <stdexcept>
#include <string>

namespace sb {

enum class ErrorKind {
  GridTooCoarse,
  InvalidModeRange,
  ResolutionTooCoarse,
  NonConvergence,
  RankDeficient,
  FormatError,
  BoxMismatch,
  ConfigError,
  IoError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + detail), kind_(kind), detail_(detail) {}
  ErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }
  // Same error with a location prefix such as "sample 3".
  Error with_context(const std::string& where) const { return Error(kind_, where + ": " + detail_); }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace sb
