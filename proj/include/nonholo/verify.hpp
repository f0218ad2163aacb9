#pragma once

#include <string>
#include <vector>

namespace nonholo {

struct VerifyCheck {
    std::string group;   // stable identifier, usable as a fault target
    bool pass = false;
    std::string detail;  // one-line summary of what was measured
};

// Names of all identity groups, in report order.
const std::vector<std::string>& verify_group_names();

// Runs every identity group and reports one line each.  `fault` names a group
// whose input is deliberately perturbed (a testing seam for the failure
// path; unknown names throw DomainError).  `threads` caps the worker pool;
// 0 reads NONHOLO_THREADS, falling back to the hardware thread count.
std::vector<VerifyCheck> run_verification(const std::string& fault = "",
                                          unsigned threads = 0);

} // namespace nonholo
