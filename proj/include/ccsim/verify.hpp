#pragma once

/// Invariant suites behind `ccsim verify`: each suite runs a property over
/// randomized inputs (or a deliberate counterexample) and reports a margin
/// and a witness string on failure.

#include <cstdint>
#include <string>
#include <vector>

namespace ccsim {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string margin;   // suite-specific magnitude, for the CSV
    std::string witness;  // what failed, empty when passed
};

struct VerifyOptions {
    std::uint64_t seed = 424242;
    bool quick = false;           // trims sample counts for unit-test use
    std::string tamper_suite;     // non-empty: deliberately corrupt this target
};

std::vector<SuiteResult> run_verification_suites(const VerifyOptions& options);

std::string suites_to_csv(const std::vector<SuiteResult>& results);
bool all_passed(const std::vector<SuiteResult>& results);

}  // namespace ccsim
