#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace chaotherm {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string measured;
    std::string expected;
    std::string note;  // informational, never part of the decision
    double seconds = 0.0;
};

struct AcceptanceOptions {
    int workers = 0;
    std::uint64_t seed = 20240611;
};

// fast: {1, 8, 10}; full: 1..10.
std::vector<int> suite_criteria(const std::string& suite);

CriterionResult run_criterion(int id, const AcceptanceOptions& options);

std::string format_result(const CriterionResult& r);

}  // namespace chaotherm
