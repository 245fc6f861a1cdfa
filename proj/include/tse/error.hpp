// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_ERROR_HPP_
#define TSE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tse {

enum class ErrorCode {
  InputTooShort,
  ShapeError,
  MetricUndefined,
  NeedMultichannel,
  InvalidThreshold,
  ScorerUnavailable,
  GradError,
  OptimStepRejected,
  CannotSetSnr,
  GeometryError,
  NoData,
  StrategyUnavailable,
  BadFile,
  BadConfig,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tse

#endif  // TSE_ERROR_HPP_
