#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mimovlc::checks {

struct SuiteResult {
    std::string name;
    bool passed = true;
    std::size_t checks = 0;
    /// First failure, or a short summary on success.
    std::string detail;
};

SuiteResult zero_noise_end_to_end(std::uint64_t seed);
SuiteResult estimator_exact(std::uint64_t seed);
SuiteResult capacity_identity(std::uint64_t seed);
SuiteResult ber_bound_dominance();
SuiteResult pseudo_inverse_oracle(std::uint64_t seed);
SuiteResult constellation_invariants(std::uint64_t seed);
SuiteResult framing_roundtrips(std::uint64_t seed);

/// Every suite above, in that order.
std::vector<SuiteResult> run_all_suites(std::uint64_t seed);

} // namespace mimovlc::checks
