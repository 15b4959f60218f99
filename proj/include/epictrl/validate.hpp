#pragma once

#include <string>
#include <vector>

#include "epictrl/gp.hpp"
#include "epictrl/rng.hpp"

namespace epictrl {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// built-in cross-validation suites: "thresholds", "gp-oracle",
// "master-equation"; throws Error for unknown names
std::vector<CheckResult> run_validation_suite(const std::string& suite);
std::vector<std::string> validation_suites();

struct RandomGpCase {
    GpProblem gp;
    std::vector<std::pair<double, double>> box;
};

// Random box-bounded GP with a strictly feasible box center; deterministic
// given the generator state. Used to cross-check the solver against the
// exhaustive grid oracle.
RandomGpCase make_random_gp(CounterRng& rng, int nvars);

} // namespace epictrl
