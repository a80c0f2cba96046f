// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace densecue {

enum class ErrorCode {
  kEmptyMask,
  kDegenerateArrow,
  kDimensionMismatch,
  kShapeMismatch,
  kLengthMismatch,
  kEmptyActiveSet,
  kBankTooSmall,
  kOddWidth,
  kIndivisibleSplit,
  kOutOfRange,
  kBadStep,
  kNonFiniteLoss,
  kDegenerateConfig,
  kNoContact,
  kTooFewFrames,
  kParse,
  kIo,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace densecue
