#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace smalldev {

struct CriterionResult {
    std::string id;    // "1", "3a", "9c", ...
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::set<int> only;  // criterion numbers to run; empty = all
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::function<void(const CriterionResult&)> on_result;  // called as each line is decided
    std::function<void(const std::string&)> on_progress;
};

/// Runs the primary acceptance battery (criteria 1 to 11).
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// "PASS 3a  <name>  measured=... target=... tol=...  (<detail>)"
std::string format_result_line(const CriterionResult& result);

/// {"suite": "primary", "passed": k, "failed": m, "criteria": [...]}. Timings
/// are included only when `with_timing` is set.
nlohmann::json acceptance_summary(const std::vector<CriterionResult>& results, bool with_timing);

}  // namespace smalldev
