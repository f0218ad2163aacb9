#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace nonholo {

// How an integration ended.  branch_loss is specific to direction-field
// continuation: the tracked root of the quadratic layer disappeared or
// collided with its sibling.
enum class Termination { completed, singular_point, step_limit, branch_loss };

struct IntegratorConfig {
    enum class Method { rk4, rkf45 };
    Method method = Method::rkf45;

    double step = 1e-3;      // fixed step size (rk4 and direction continuation)
    double rel_tol = 1e-10;  // rkf45 local error control
    double abs_tol = 1e-10;
    std::size_t max_steps = 1000000;
    double s_end = 1.0;

    // 0: record every accepted step.  n > 0: record exactly the n+1 points of
    // the uniform grid over [0, s_end] (the integrator lands on them), which
    // makes trajectories from different systems directly comparable.
    std::size_t samples = 0;
};

// Ordered samples of one integration, plus any named scalar series recorded
// alongside (conservation monitors and the like).
struct Trajectory {
    std::vector<double> s;                          // strictly increasing
    std::vector<std::vector<double>> states;        // one vector per sample
    std::vector<std::string> state_names;           // column labels, one per state entry
    std::vector<std::string> monitor_names;
    std::vector<std::vector<double>> monitor_values;  // [monitor][sample]
    Termination termination = Termination::completed;

    std::size_t size() const { return s.size(); }
    const std::vector<double>& back_state() const { return states.back(); }

    bool has_monitor(const std::string& name) const;
    // Throws DomainError for an unknown name.
    const std::vector<double>& monitor(const std::string& name) const;
};

const char* to_string(Termination t);

} // namespace nonholo
