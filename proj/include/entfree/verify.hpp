#pragma once

// Registry of verification checks. Each entry runs a fixed-seed experiment
// and returns measured values against thresholds; `entfree verify` and the
// acceptance binary both draw from it.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "entfree/report.hpp"

namespace entfree {

inline constexpr std::uint64_t kSuiteSeed = 20050401;

struct VerificationCheck {
    std::string id;
    int criterion; // acceptance criterion number, 1..11
    std::string description;
    std::function<std::vector<CheckResult>()> run;
};

const std::vector<VerificationCheck>& verification_checks();

// Runs every check whose id matches `filter` (regex search; empty matches
// all). Check names in the report are prefixed with the check id. A filter
// that selects nothing yields an empty report with a warning.
RunReport verify_suite(const std::string& filter = "");

}  // namespace entfree
