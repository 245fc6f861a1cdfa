// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/error.hpp"

namespace tse {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InputTooShort: return "InputTooShort";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::MetricUndefined: return "MetricUndefined";
    case ErrorCode::NeedMultichannel: return "NeedMultichannel";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
    case ErrorCode::ScorerUnavailable: return "ScorerUnavailable";
    case ErrorCode::GradError: return "GradError";
    case ErrorCode::OptimStepRejected: return "OptimStepRejected";
    case ErrorCode::CannotSetSnr: return "CannotSetSnr";
    case ErrorCode::GeometryError: return "GeometryError";
    case ErrorCode::NoData: return "NoData";
    case ErrorCode::StrategyUnavailable: return "StrategyUnavailable";
    case ErrorCode::BadFile: return "BadFile";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "UnknownError";
}

}  // namespace tse
