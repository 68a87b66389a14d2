#pragma once

// Finite-difference verification of every differentiable op. The oracle
// runs the forward graph in double precision and compares central
// differences (step 1e-5) against the tape's analytic gradients.

#include <cstdint>
#include <string>
#include <vector>

namespace vin::num {

struct GradCheckResult {
    std::string op;
    int instances = 0;
    double max_rel_err = 0.0;
    double tolerance = 1e-4;
    bool pass = false;
};

std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed = 20240513,
                                           int instances_per_op = 20);

bool all_pass(const std::vector<GradCheckResult>& results);

}  // namespace vin::num
