#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "secalloc/instance.hpp"
#include "secalloc/scoring.hpp"
#include "secalloc/types.hpp"

namespace secalloc {

constexpr double kEpsilonStrict = 1e-9;   // boundary tightening on indicator rows
constexpr double kFeasibilityTol = 1e-6;  // row/bound satisfaction tolerance
constexpr double kIntegralityTol = 1e-6;  // binary variables must be this close to {0,1}

enum class Sense { LessEqual, Equal, GreaterEqual };

struct LinearTerm {
    std::size_t var;
    double coef;
};

struct Constraint {
    std::string name;
    std::vector<LinearTerm> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

struct VariableInfo {
    std::string name;
    double lb = 0.0;
    double ub = 1.0;
    bool integral = false;
};

// Linearized model: variables (b, f, x, h, y) in contiguous blocks, the
// product terms h_i = f_i x_i rewritten as four inequalities per i, and one
// pair of big-M indicator rows per sequence. Objective is minimized.
struct MilpModel {
    std::vector<VariableInfo> vars;
    std::vector<Constraint> constraints;
    RealVector objective; // one coefficient per variable

    std::size_t n_sectors = 0;
    std::size_t n_mitigations = 0;
    std::size_t n_sequences = 0;

    // Block offsets into vars: [b | f | x | h | y].
    std::size_t b_offset = 0, f_offset = 0, x_offset = 0, h_offset = 0, y_offset = 0;

    RealVector big_m;              // per-sequence indicator constants K_l
    double delta_prime = 0.0;      // log(delta)
    double epsilon_strict = 1e-9;  // tightens the first indicator row at the boundary
    double tiebreak_weight = 0.0;  // per-x objective weight (0 when disabled)

    std::size_t idx_b(std::size_t j) const { return b_offset + j; }
    std::size_t idx_f(std::size_t i) const { return f_offset + i; }
    std::size_t idx_x(std::size_t i) const { return x_offset + i; }
    std::size_t idx_h(std::size_t i) const { return h_offset + i; }
    std::size_t idx_y(std::size_t l) const { return y_offset + l; }
};

// Per-sequence indicator constants, sized so that every feasible (x, h)
// satisfies |l_l - delta'| <= K_l:
//   K_l = |delta'| + eps + sum_{k in seq l} sum_i M[i][k] (|log(1-eta0_i)| + lambda).
// The eps term keeps the y_l = 1 branch feasible for sequences no mitigation
// touches, where l_l - delta' attains the bound exactly.
RealVector compute_big_m(const ProblemInstance& instance);

// Builds the full model: 4*N_M product rows, N_M budget-definition rows, one
// simplex row, 2*N_D indicator rows; N_C + 2*N_M continuous and N_M + N_D
// binary variables. Throws ValidationError on an empty sequence set.
MilpModel build_model(const ProblemInstance& instance);

struct McCormickInterval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

// Feasible range of h under the four product inequalities at fixed (x, f).
McCormickInterval mccormick_interval(double x, double f);

// Asserts the range collapses to the single point f*x and returns it.
double mccormick_exactness_check(double x, double f);

// CPLEX LP text format, rows named mc_<i>_<1..4>, fdef_<i>, simplex,
// ind_<l>_<1..2> with 0-based indices; for external cross-checking.
std::string export_lp(const MilpModel& model);

enum class SolveStatus { Optimal, Feasible, Infeasible, TimedOut };

std::string to_string(SolveStatus status);

struct Solution {
    BinaryVector x;
    RealVector b;
    std::size_t objective = 0; // highly-likely count, recomputed via scoring
    double vulnerability = 0.0;
    ScoreBreakdown breakdown;
    SolveStatus status = SolveStatus::Infeasible;
    double gap = 0.0;              // (incumbent - best bound) / max(1, incumbent)
    double combined_objective = 0; // objective + tiebreak_weight * sum(x)
    std::size_t nodes_explored = 0;
    double seconds = 0.0;
};

// Checks the incumbent against every model row (1e-6 tolerance), re-scores
// (x, b) through the closed-form algebra, and cross-checks the claimed
// objective; disagreement beyond the threshold boundary band raises
// SolverBugError, an infeasible incumbent raises InfeasibleError.
Solution extract_solution(const MilpModel& model, const RealVector& incumbent,
                          const ProblemInstance& instance,
                          std::optional<std::size_t> claimed_count = std::nullopt);

} // namespace secalloc
