// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/error.hpp"

namespace densecue {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDegenerateArrow: return "DegenerateArrow";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyActiveSet: return "EmptyActiveSet";
    case ErrorCode::kBankTooSmall: return "BankTooSmall";
    case ErrorCode::kOddWidth: return "OddWidth";
    case ErrorCode::kIndivisibleSplit: return "IndivisibleSplit";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kBadStep: return "BadStep";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kDegenerateConfig: return "DegenerateConfig";
    case ErrorCode::kNoContact: return "NoContact";
    case ErrorCode::kTooFewFrames: return "TooFewFrames";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace densecue
