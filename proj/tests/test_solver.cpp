#include <doctest.h>

#include <cmath>

#include "secalloc/errors.hpp"
#include "secalloc/oracle.hpp"
#include "secalloc/simplex.hpp"
#include "secalloc/solver.hpp"
#include "test_support.hpp"

using namespace secalloc;
using namespace testsupport;

namespace {

SolverOptions quick() {
    SolverOptions opts;
    opts.time_limit_seconds = 30.0;
    return opts;
}

} // namespace

TEST_CASE("instance A with strong skill reaches zero vulnerability") {
    const auto inst = instance_a(2.0, 0.2);
    const auto sol = branch_and_bound(build_model(inst), inst, quick());
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == 0);
    CHECK(sol.vulnerability == 0.0);
    // A concentrated budget lets a single mitigation kill the sequence, so
    // the sparse tie-break keeps exactly one.
    std::size_t picked = 0;
    for (auto xi : sol.x) picked += xi;
    CHECK(picked == 1);
}

TEST_CASE("instance A without the tie-break may keep every mitigation") {
    InstanceOptions options;
    options.sparse_tiebreak = false;
    const auto inst = instance_a(2.0, 0.2, options);
    const auto sol = branch_and_bound(build_model(inst), inst, quick());
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == 0);
}

TEST_CASE("instance A with weak skill stays fully vulnerable") {
    const auto inst = instance_a(1.0, 0.2);
    const auto sol = branch_and_bound(build_model(inst), inst, quick());
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == 1);
    CHECK(sol.vulnerability == 1.0);
}

TEST_CASE("instance B needs a lopsided budget") {
    const auto inst = instance_b(0.9, 0.2);
    const auto sol = branch_and_bound(build_model(inst), inst, quick());
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == 0);
    // log v = -0.9 (2 b1 x1 + b2 x2) needs b1 above the one-dimensional
    // threshold (|ln 0.2| - 0.9) / 0.9 = 0.78826.
    CHECK(sol.x[0] == 1);
    CHECK(sol.b[0] >= 0.7882);
}

TEST_CASE("all-zero coverage keeps vulnerability one and selects nothing") {
    const auto inst = instance_all_zero_m(3);
    const auto sol = branch_and_bound(build_model(inst), inst, quick());
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == 3);
    CHECK(sol.vulnerability == 1.0);
    CHECK(sol.x == BinaryVector{0}); // the tie-break strips the useless mitigation
}

TEST_CASE("solver output is deterministic") {
    const auto inst = instance_b(0.9, 0.2);
    const auto model = build_model(inst);
    const auto a = branch_and_bound(model, inst, quick());
    const auto b = branch_and_bound(model, inst, quick());
    CHECK(a.objective == b.objective);
    CHECK(a.x == b.x);
    CHECK(a.b == b.b);
}

TEST_CASE("parallel sibling solves report the sequential answer") {
    const auto inst = instance_b(0.9, 0.2);
    const auto model = build_model(inst);
    SolverOptions seq = quick();
    SolverOptions par = quick();
    par.parallel = 2;
    const auto a = branch_and_bound(model, inst, seq);
    const auto b = branch_and_bound(model, inst, par);
    CHECK(a.objective == b.objective);
    CHECK(a.x == b.x);
    CHECK(a.b == b.b);
    CHECK(a.nodes_explored == b.nodes_explored);
}

TEST_CASE("greedy heuristic finds the easy optimum of instance A") {
    const auto inst = instance_a(2.0, 0.2);
    const auto sol = greedy_heuristic(build_model(inst), inst, quick());
    CHECK(sol.status == SolveStatus::Feasible);
    CHECK(sol.objective == 0);
}

TEST_CASE("greedy heuristic cannot improve an uncoverable instance") {
    const auto inst = instance_all_zero_m(4);
    const auto sol = greedy_heuristic(build_model(inst), inst, quick());
    CHECK(sol.objective == 4);
}

TEST_CASE("greedy heuristic walks the budget to the instance B optimum") {
    const auto inst = instance_b(0.9, 0.2);
    const auto sol = greedy_heuristic(build_model(inst), inst, quick());
    CHECK(sol.objective == 0);
    CHECK(sol.b[0] == doctest::Approx(0.80).epsilon(1e-9));
    CHECK(sol.b[1] == doctest::Approx(0.20).epsilon(1e-9));
}

TEST_CASE("heuristic never beats the exact solver") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto inst = random_instance(seed);
        const auto model = build_model(inst);
        const auto heur = greedy_heuristic(model, inst, quick());
        const auto exact = branch_and_bound(model, inst, quick());
        CHECK(heur.objective >= exact.objective);
    }
}

TEST_CASE("exact solver matches the exhaustive oracle on tiny instances") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const auto inst = random_instance(seed);
        const auto sol = branch_and_bound(build_model(inst), inst, quick());
        REQUIRE(sol.status == SolveStatus::Optimal);
        const auto oracle = exhaustive_optimum(inst, 0.1);
        CHECK(sol.objective <= oracle.best_objective);

        // The grid attains the continuous optimum whenever re-scoring the
        // solver's x over the grid reaches the same count.
        std::size_t best_at_solver_x = inst.n_sequences() + 1;
        for (const auto& b : simplex_grid(inst.n_sectors(), 0.1)) {
            const auto breakdown = score_assignment(inst, sol.x, BudgetVector(b));
            best_at_solver_x = std::min(best_at_solver_x, breakdown.highly_likely_count);
        }
        if (best_at_solver_x == sol.objective) CHECK(sol.objective == oracle.best_objective);
    }
}

TEST_CASE("objective is nonincreasing in lambda") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        std::size_t prev = SIZE_MAX;
        for (double lambda : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            RandomInstanceParams p;
            p.lambda = lambda;
            const auto inst = random_instance(seed + 200, p);
            const auto sol = branch_and_bound(build_model(inst), inst, quick());
            REQUIRE(sol.status == SolveStatus::Optimal);
            CHECK(sol.objective <= prev);
            prev = sol.objective;
        }
    }
}

TEST_CASE("removing a mitigation never helps") {
    const auto base = random_instance(42);
    const auto base_sol = branch_and_bound(build_model(base), base, quick());
    for (std::size_t drop = 0; drop < base.n_mitigations(); ++drop) {
        KnowledgeBase kb = base.kb;
        kb.mitigations.erase(kb.mitigations.begin() + static_cast<std::ptrdiff_t>(drop));
        const auto inst =
            make_instance(std::move(kb), base.seqs.sequences, base.lambda, base.delta, {});
        const auto sol = branch_and_bound(build_model(inst), inst, quick());
        CHECK(sol.objective >= base_sol.objective);
    }
}

TEST_CASE("feasibility anchor: empty selection flags everything") {
    const auto inst = random_instance(3);
    const auto model = build_model(inst);
    const auto vec = completion_vector(model, inst, BinaryVector(inst.n_mitigations(), 0),
                                       BudgetVector::uniform(inst.n_sectors()));
    const auto sol = extract_solution(model, vec, inst);
    CHECK(sol.objective == inst.n_sequences());
}

TEST_CASE("node limit reports a timed-out incumbent with a gap") {
    const auto inst = instance_b(0.9, 0.2);
    SolverOptions opts = quick();
    opts.node_limit = 1;
    opts.heuristic_enabled = false;
    const auto sol = branch_and_bound(build_model(inst), inst, opts);
    CHECK(sol.status == SolveStatus::TimedOut);
    CHECK(sol.gap > 0.0);
}

TEST_CASE("pseudo-cost branching reaches the same optimum") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto inst = random_instance(seed + 77);
        SolverOptions mf = quick();
        SolverOptions pc = quick();
        pc.branching = SolverOptions::Branching::PseudoCost;
        const auto a = branch_and_bound(build_model(inst), inst, mf);
        const auto b = branch_and_bound(build_model(inst), inst, pc);
        CHECK(a.objective == b.objective);
    }
}

TEST_CASE("cardinality cap restricts the selection") {
    InstanceOptions options;
    options.max_selected = 1;
    const auto inst = instance_a(2.0, 0.2, options);
    const auto sol = branch_and_bound(build_model(inst), inst, quick());
    std::size_t picked = 0;
    for (auto xi : sol.x) picked += xi;
    CHECK(picked <= 1);
    // A single mitigation with the whole budget still pushes the sequence
    // product to e^-2 < 0.2.
    CHECK(sol.objective == 0);

    // With delta tight enough that one mitigation cannot get there, the cap
    // binds and the count stays at 1.
    const auto tight = instance_a(2.0, 0.1, options);
    const auto tight_sol = branch_and_bound(build_model(tight), tight, quick());
    CHECK(tight_sol.objective == 1);
}

TEST_CASE("root relaxation value bounds the integer optimum") {
    // With the tie-break off, both the relaxation and the oracle count the
    // same objective, so the LP value must sit at or below the optimum.
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        RandomInstanceParams p;
        auto inst = random_instance(seed + 300, p);
        inst.options.sparse_tiebreak = false;
        const auto model = build_model(inst);
        const auto root = solve_lp(lp_relaxation(model));
        REQUIRE(root.status == LpStatus::Optimal);
        const auto oracle = exhaustive_optimum(inst, 0.25);
        CHECK(root.objective <= static_cast<double>(oracle.best_objective) + 1e-7);
    }
}

TEST_CASE("solver options are validated") {
    SolverOptions bad;
    bad.time_limit_seconds = 0.0;
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad = SolverOptions{};
    bad.node_limit = 0;
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad = SolverOptions{};
    bad.parallel = 0;
    CHECK_THROWS_AS(bad.check(), ConfigError);
}
