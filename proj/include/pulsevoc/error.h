// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace pulsevoc {

// Values double as CLI exit codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kNumerical = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

[[noreturn]] inline void throw_io(const std::string& what) {
  throw Error(ErrorCode::kIo, what);
}

[[noreturn]] inline void throw_numerical(const std::string& what) {
  throw Error(ErrorCode::kNumerical, what);
}

}  // namespace pulsevoc
