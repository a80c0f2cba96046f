// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace densecue::selfcheck {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the built-in invariant suite (a few seconds). on_result, when set,
/// is called after each check.
std::vector<CheckResult> run_all(std::uint64_t seed,
                                 const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace densecue::selfcheck
