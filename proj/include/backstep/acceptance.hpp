#pragma once

#include <functional>
#include <string>
#include <vector>

namespace backstep {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;  // measured values behind the verdict
};

// "[PASS] 3 transform inverseness: <detail>"
std::string format_result(const CriterionResult& r);

/// Runs the nine acceptance criteria in order. `on_result` (optional) sees
/// each result as soon as it is known. A criterion that throws is reported
/// as failed with the exception text; the remaining criteria still run.
std::vector<CriterionResult> run_acceptance(
    const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace backstep
