#pragma once

#include <cstdint>

#include "secalloc/milp.hpp"
#include "secalloc/simplex.hpp"

namespace secalloc {

struct SolverOptions {
    double time_limit_seconds = 60.0;
    std::size_t node_limit = 1000000;
    enum class Branching { MostFractional, PseudoCost };
    Branching branching = Branching::MostFractional;
    bool heuristic_enabled = true;
    // Seeds any randomized heuristic component; the default greedy walk is
    // deterministic, so this only matters for future heuristics.
    std::uint64_t rng_seed = 12345;
    unsigned parallel = 1; // >= 2 solves sibling relaxations concurrently
    std::size_t lp_iteration_limit = 100000;

    void check() const; // throws ConfigError on nonpositive limits
};

// Exact solve by depth-first branch-and-bound over the binary variables with
// a dense-simplex relaxation at every node. Deterministic: fixed branching
// order (x block before y block, most-fractional within a block, smallest
// index on ties) and value order (x -> 1 first, y -> 0 first). Sibling
// relaxations may be solved concurrently; that changes wall time only, never
// the explored tree or the reported solution.
Solution branch_and_bound(const MilpModel& model, const ProblemInstance& instance,
                          const SolverOptions& opts = {});

// Feasible-solution search without optimality proof: start from x = all-ones
// and a uniform budget, walk the budget simplex in 0.05 steps while the
// (count, threshold-excess) pair strictly improves, then drop mitigations
// whose removal keeps the count. At most 10 * N_M * N_C scoring evaluations.
Solution greedy_heuristic(const MilpModel& model, const ProblemInstance& instance,
                          const SolverOptions& opts = {});

// The always-feasible completion of an (x, b) choice: f from the budget
// definition, h = f*x, y = the scored flags. Used for anchors and incumbents.
RealVector completion_vector(const MilpModel& model, const ProblemInstance& instance,
                             const BinaryVector& x, const BudgetVector& b);

} // namespace secalloc
