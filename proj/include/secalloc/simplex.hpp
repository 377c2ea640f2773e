#pragma once

#include <cstdint>
#include <limits>

#include "secalloc/milp.hpp"

namespace secalloc {

constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

// Linear relaxation (or any LP) in the same row vocabulary as MilpModel.
// Variable bounds may be finite or +infinity on the upper side; the model
// relaxations this project builds keep every variable inside [0, 1].
struct LpProblem {
    RealVector objective; // minimize
    std::vector<Constraint> rows;
    RealVector lower;
    RealVector upper;
    // Optional start hint: nonbasic variables flagged here begin at their
    // upper bound, which removes most phase-1 artificials on our models.
    std::vector<std::uint8_t> start_at_upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::IterationLimit;
    RealVector values; // one entry per structural variable
    double objective = 0.0;
    std::size_t iterations = 0;
};

// Drops integrality and keeps everything else; y variables are hinted to
// start at their upper bound (the always-feasible "flag everything" point).
LpProblem lp_relaxation(const MilpModel& model);

// Two-phase primal simplex on a dense tableau with explicit lower/upper
// variable bounds. Pivot choice is largest reduced cost with smallest-index
// ties; after a run of degenerate steps it falls back to Bland's rule until
// progress resumes, so the method terminates and is fully deterministic.
LpResult solve_lp(const LpProblem& problem, std::size_t iteration_limit = 100000);

} // namespace secalloc
