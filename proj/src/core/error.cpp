#include "error.hpp"

namespace hf {

const char *to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument:
    return "invalid-argument";
  case ErrorCode::Parse:
    return "parse-error";
  case ErrorCode::Config:
    return "config-error";
  case ErrorCode::Io:
    return "io-error";
  case ErrorCode::Format:
    return "format-error";
  case ErrorCode::UnsupportedVersion:
    return "unsupported-version";
  case ErrorCode::Truncated:
    return "truncated";
  case ErrorCode::InfeasibleSchedule:
    return "infeasible-schedule";
  case ErrorCode::Measurement:
    return "measurement-error";
  case ErrorCode::Runtime:
    return "runtime-error";
  }
  return "unknown";
}

} // namespace hf
