#include "nonholo/trajectory.hpp"

#include "nonholo/errors.hpp"

#include <algorithm>

namespace nonholo {

bool Trajectory::has_monitor(const std::string& name) const {
    return std::find(monitor_names.begin(), monitor_names.end(), name) !=
           monitor_names.end();
}

const std::vector<double>& Trajectory::monitor(const std::string& name) const {
    auto it = std::find(monitor_names.begin(), monitor_names.end(), name);
    if (it == monitor_names.end())
        throw DomainError("no monitor named '" + name + "'");
    return monitor_values[static_cast<std::size_t>(it - monitor_names.begin())];
}

const char* to_string(Termination t) {
    switch (t) {
    case Termination::completed: return "completed";
    case Termination::singular_point: return "singular_point";
    case Termination::step_limit: return "step_limit";
    case Termination::branch_loss: return "branch_loss";
    }
    return "unknown";
}

} // namespace nonholo
