#pragma once

#include <functional>
#include <string>
#include <vector>

namespace vibratrak {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measure = 0.0;  // worst observed value of the checked quantity
    double limit = 0.0;
    std::string detail;
};

/// Run the full invariant/property suite (transforms, conservation, Jacobian
/// finite differences, fast-AFT equivalence, decomposition identity, backbone
/// contracts, ...). The optional callback observes each result as it lands.
std::vector<CheckResult> run_validation_suite(
    const std::function<void(const CheckResult&)>& on_result = {});

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace vibratrak
