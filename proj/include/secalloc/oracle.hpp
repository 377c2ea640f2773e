#pragma once

#include <utility>
#include <vector>

#include "secalloc/instance.hpp"

namespace secalloc {

// Brute-force reference: enumerates every x in {0,1}^N_M against a budget
// grid and re-scores through the closed-form algebra. It shares only the
// scoring path with the solver, so agreement is a meaningful check.
struct OracleResult {
    std::size_t best_objective = 0;
    std::vector<std::pair<BinaryVector, RealVector>> witnesses; // capped at 100
    double grid_step = 0.0;
    std::size_t evaluations = 0;
};

// All compositions of 1 into n nonnegative multiples of step, in
// lexicographic order. step must divide 1 exactly (0.5, 0.25, 0.1, ...);
// anything else raises ConfigError. Count is C(1/step + n - 1, n - 1).
std::vector<RealVector> simplex_grid(std::size_t n, double step);

// Default step used by the verify command: 0.1 up to three sectors, 0.25
// up to five, 0.5 beyond that (the work guard usually trips first).
double default_grid_step(std::size_t n_sectors);

// Exact minimum over the enumerated lattice. Guards the enumeration at
// 2^N_M * |grid| <= 10^7 and raises BudgetExceededError beyond it.
OracleResult exhaustive_optimum(const ProblemInstance& instance, double grid_step);

} // namespace secalloc
