// Runs the acceptance battery and prints one PASS/FAIL line per criterion.
// Optional argument: comma separated criterion numbers to run.

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "smalldev/acceptance.hpp"

int main(int argc, char** argv) {
    smalldev::AcceptanceOptions options;
    if (argc > 1) {
        std::istringstream ss(argv[1]);
        std::string token;
        while (std::getline(ss, token, ',')) {
            options.only.insert(std::stoi(token));
        }
    }
    if (const char* seed = std::getenv("SMALLDEV_SEED"); seed && *seed) {
        options.seed = std::stoull(seed);
    }
    options.workers = std::max(1u, std::thread::hardware_concurrency());
    options.on_result = [](const smalldev::CriterionResult& r) {
        std::cout << smalldev::format_result_line(r) << std::endl;
    };
    options.on_progress = [](const std::string& msg) { std::cerr << "  .. " << msg << std::endl; };

    const auto results = smalldev::run_acceptance(options);
    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
    std::cout << "acceptance: " << results.size() - failed << "/" << results.size() << " passed" << std::endl;
    std::cout << smalldev::acceptance_summary(results, true).dump(2) << std::endl;
    return failed == 0 ? 0 : 1;
}
