#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "secalloc/errors.hpp"
#include "secalloc/milp.hpp"
#include "secalloc/solver.hpp"
#include "test_support.hpp"

using namespace secalloc;
using namespace testsupport;

namespace {

// Evaluates l_l for an explicit assignment, straight from the tables.
double sequence_log_rate(const ProblemInstance& inst, std::size_t l, const BinaryVector& x,
                         const RealVector& f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < inst.n_techniques(); ++k) {
        if (!inst.seqs.S(l, k)) continue;
        for (std::size_t i = 0; i < inst.n_mitigations(); ++i) {
            if (!inst.M(i, k) || !x[i]) continue;
            acc += inst.P(i, k) - inst.lambda * f[i];
        }
    }
    return acc;
}

} // namespace

TEST_CASE("big-M constants follow the sizing rule") {
    const auto inst = instance_a(2.0, 0.2);
    const auto k = compute_big_m(inst);
    REQUIRE(k.size() == 1);
    // One covering mitigation per technique, eta0 = 0: |ln 0.2| + 2 * lambda... the
    // sequence has two techniques each covered once.
    CHECK(k[0] == doctest::Approx(std::abs(std::log(0.2)) + 2.0 * 2.0).epsilon(1e-6));
}

TEST_CASE("big-M for a single covered technique") {
    KnowledgeBase kb;
    kb.tactic_order = tactics(1);
    kb.techniques = {tech("t1", "impact")};
    kb.sectors = {sector("s1")};
    kb.mitigations = {mit("m1", 0.0, {"s1"}, {"t1"})};
    const auto inst =
        make_instance(std::move(kb), {AttackSequence{{"t1"}}}, 2.0, 0.2, {});
    const auto k = compute_big_m(inst);
    CHECK(k[0] == doctest::Approx(3.609438).epsilon(1e-6));
}

TEST_CASE("uncovered sequence collapses the constant to the threshold") {
    const auto inst = instance_all_zero_m(1);
    const auto k = compute_big_m(inst);
    CHECK(k[0] == doctest::Approx(std::abs(std::log(0.2))).epsilon(1e-6));
}

TEST_CASE("doubling lambda raises each constant by the coverage count") {
    const auto low = instance_b(0.9, 0.2);
    const auto high = instance_b(1.8, 0.2);
    const auto k_low = compute_big_m(low);
    const auto k_high = compute_big_m(high);
    // m1 covers both techniques, m2 covers one: coverage count 3.
    CHECK(k_high[0] - k_low[0] == doctest::Approx(0.9 * 3.0).epsilon(1e-9));
}

TEST_CASE("model has the documented variable and constraint counts") {
    const auto inst = instance_a(2.0, 0.2); // N_M = 2, N_C = 2, N_D = 1
    const auto model = build_model(inst);

    std::size_t continuous = 0, binary = 0;
    for (const auto& v : model.vars) (v.integral ? binary : continuous) += 1;
    CHECK(continuous == 6);
    CHECK(binary == 3);
    CHECK(model.constraints.size() == 13);

    std::set<std::string> names;
    for (const auto& c : model.constraints) names.insert(c.name);
    CHECK(names.count("mc_0_1") == 1);
    CHECK(names.count("mc_1_4") == 1);
    CHECK(names.count("fdef_0") == 1);
    CHECK(names.count("simplex") == 1);
    CHECK(names.count("ind_0_1") == 1);
    CHECK(names.count("ind_0_2") == 1);
}

TEST_CASE("lambda zero removes budget terms from the indicators") {
    const auto inst = instance_a(0.0, 0.2);
    const auto model = build_model(inst);
    for (const auto& c : model.constraints) {
        if (c.name.rfind("ind_", 0) != 0) continue;
        for (const auto& t : c.terms) {
            const bool is_h = t.var >= model.h_offset && t.var < model.h_offset + 2;
            CHECK_FALSE(is_h);
        }
    }
}

TEST_CASE("empty sequence set cannot be modeled") {
    KnowledgeBase kb;
    kb.tactic_order = tactics(1);
    kb.techniques = {tech("t1", "impact")};
    kb.sectors = {sector("s1")};
    kb.mitigations = {mit("m1", 0.0, {"s1"}, {"t1"})};
    const auto inst = make_instance(std::move(kb), {}, 1.0, 0.2, {});
    CHECK_THROWS_AS(build_model(inst), ValidationError);
}

TEST_CASE("model build is deterministic") {
    const auto inst = instance_b();
    CHECK(export_lp(build_model(inst)) == export_lp(build_model(inst)));
}

TEST_CASE("product linearization collapses to f*x on the full grid") {
    for (int xi = 0; xi <= 1; ++xi) {
        for (int step = 0; step <= 100; ++step) {
            const double f = static_cast<double>(step) / 100.0;
            const auto iv = mccormick_interval(static_cast<double>(xi), f);
            CHECK(iv.width() < 1e-12);
            CHECK(mccormick_exactness_check(static_cast<double>(xi), f) ==
                  doctest::Approx(f * static_cast<double>(xi)).epsilon(1e-12));
        }
    }
    CHECK(mccormick_exactness_check(1.0, 0.3) == doctest::Approx(0.3));
    CHECK(mccormick_exactness_check(0.0, 0.7) == 0.0);
    CHECK(mccormick_exactness_check(1.0, 1.0) == 1.0);
    CHECK_THROWS_AS(mccormick_exactness_check(0.5, 0.5), ConfigError);
}

TEST_CASE("big-M constants bound the threshold distance on random points") {
    std::mt19937_64 rng(21);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = random_instance(seed);
        const auto k = compute_big_m(inst);
        const double delta_prime = std::log(inst.delta);
        for (int draw = 0; draw < 1000; ++draw) {
            BinaryVector x(inst.n_mitigations(), 0);
            for (auto& xi : x) xi = rng() % 2;
            RealVector raw(inst.n_sectors(), 0.0);
            double sum = 0.0;
            for (auto& v : raw) {
                v = static_cast<double>(rng() % 1000 + 1);
                sum += v;
            }
            for (auto& v : raw) v /= sum;
            // Tidy the rounding so the simplex invariant holds exactly.
            double partial = 0.0;
            for (std::size_t j = 0; j + 1 < raw.size(); ++j) partial += raw[j];
            raw.back() = 1.0 - partial;
            const auto f = fractional_budget(inst.C, BudgetVector(raw));
            for (std::size_t l = 0; l < inst.n_sequences(); ++l) {
                const double ll = sequence_log_rate(inst, l, x, f);
                CHECK(std::abs(ll - delta_prime) <= k[l]);
            }
        }
    }
}

TEST_CASE("indicator rows hold when y follows the threshold cases") {
    std::mt19937_64 rng(22);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto inst = random_instance(seed + 50);
        const auto model = build_model(inst);
        for (int draw = 0; draw < 50; ++draw) {
            BinaryVector x(inst.n_mitigations(), 0);
            for (auto& xi : x) xi = rng() % 2;
            RealVector raw(inst.n_sectors(), 1.0);
            raw[rng() % raw.size()] += static_cast<double>(rng() % 5);
            double sum = 0.0;
            for (double v : raw) sum += v;
            for (auto& v : raw) v /= sum;
            double partial = 0.0;
            for (std::size_t j = 0; j + 1 < raw.size(); ++j) partial += raw[j];
            raw.back() = 1.0 - partial;

            const BudgetVector b(raw);
            const auto vec = completion_vector(model, inst, x, b);
            // The completion sets y from the scored flags; every row must hold.
            CHECK_NOTHROW(extract_solution(model, vec, inst));
        }
    }
}

TEST_CASE("lp export names rows and sections") {
    const auto inst = instance_a(2.0, 0.2);
    const auto text = export_lp(build_model(inst));
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("mc_0_1:") != std::string::npos);
    CHECK(text.find("fdef_1:") != std::string::npos);
    CHECK(text.find("simplex:") != std::string::npos);
    CHECK(text.find("ind_0_1:") != std::string::npos);
    CHECK(text.find("Binaries") != std::string::npos);
    CHECK(text.find("x0") != std::string::npos);
    CHECK(text.find("y0") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("extract_solution rejects infeasible and inconsistent incumbents") {
    const auto inst = instance_a(2.0, 0.2);
    const auto model = build_model(inst);
    const BudgetVector b({0.5, 0.5});
    const auto good = completion_vector(model, inst, {1, 1}, b);

    SUBCASE("a consistent incumbent extracts cleanly") {
        const auto sol = extract_solution(model, good, inst);
        CHECK(sol.objective == 0);
        CHECK(sol.vulnerability == 0.0);
    }
    SUBCASE("violating the simplex row is infeasible") {
        auto bad = good;
        bad[model.idx_b(0)] = 0.9; // sum now 1.4
        CHECK_THROWS_AS(extract_solution(model, bad, inst), InfeasibleError);
    }
    SUBCASE("fractional binaries are rejected") {
        auto bad = good;
        bad[model.idx_x(0)] = 0.4;
        CHECK_THROWS_AS(extract_solution(model, bad, inst), InfeasibleError);
    }
    SUBCASE("a shifted claimed objective trips the consistency check") {
        CHECK_THROWS_AS(extract_solution(model, good, inst, 1), SolverBugError);
    }
}

TEST_CASE("cardinality cap row appears when configured") {
    InstanceOptions options;
    options.max_selected = 1;
    const auto inst = instance_a(2.0, 0.2, options);
    const auto model = build_model(inst);
    bool found = false;
    for (const auto& c : model.constraints) found |= c.name == "card";
    CHECK(found);
}
