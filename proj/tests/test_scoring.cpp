#include <doctest.h>

#include <cmath>
#include <random>

#include "secalloc/errors.hpp"
#include "secalloc/scoring.hpp"
#include "test_support.hpp"

using namespace secalloc;

namespace {

BinaryTable table(std::initializer_list<std::initializer_list<int>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    BinaryTable t(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (int v : row) t(i, j++) = static_cast<std::uint8_t>(v);
        ++i;
    }
    return t;
}

} // namespace

TEST_CASE("budget vector enforces the simplex") {
    CHECK_NOTHROW(BudgetVector({0.6, 0.4}));
    CHECK_THROWS_AS(BudgetVector({0.6, 0.5}), ValidationError);
    CHECK_THROWS_AS(BudgetVector({1.2, -0.2}), ValidationError);
    const auto u = BudgetVector::uniform(7);
    double sum = 0.0;
    for (double v : u.values()) sum += v;
    CHECK(sum == 1.0);
}

TEST_CASE("scoring parameters are range-checked") {
    ScoringParams p;
    CHECK_NOTHROW(p.check());
    p.lambda = -0.5;
    CHECK_THROWS_AS(p.check(), ConfigError);
    p = ScoringParams{};
    p.delta = 0.0;
    CHECK_THROWS_AS(p.check(), ConfigError);
    p.delta = 1.5;
    CHECK_THROWS_AS(p.check(), ConfigError);
}

TEST_CASE("fractional budget averages the covered sectors") {
    const auto c = table({{1, 1, 0}, {0, 0, 1}});
    const auto f = fractional_budget(c, BudgetVector({0.6, 0.4, 0.0}));
    REQUIRE(f.size() == 2);
    CHECK(f[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("full membership row gets 1/n of any budget") {
    const auto c = table({{1, 1, 1}});
    for (auto b : {BudgetVector({1.0, 0.0, 0.0}), BudgetVector({0.2, 0.3, 0.5})}) {
        const auto f = fractional_budget(c, b);
        CHECK(f[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("unit mass budget isolates one sector") {
    const auto c = table({{1, 1, 0}, {0, 1, 0}});
    const auto f = fractional_budget(c, BudgetVector({0.0, 1.0, 0.0}));
    CHECK(f[0] == doctest::Approx(0.5));
    CHECK(f[1] == doctest::Approx(1.0));
}

TEST_CASE("all-zero sector row is rejected") {
    const auto c = table({{0, 0}});
    CHECK_THROWS_AS(fractional_budget(c, BudgetVector({0.5, 0.5})), ValidationError);
}

TEST_CASE("efficacy improvement matches the closed form") {
    CHECK(improve_efficacy(0.5, 0.1, 1.0) == doctest::Approx(0.547581).epsilon(1e-6));
    CHECK(improve_efficacy(0.0, 0.1, 1.0) == doctest::Approx(0.095163).epsilon(1e-6));
    CHECK(improve_efficacy(0.7, 2.0, 0.0) == 0.7); // zero allocation keeps eta0
}

TEST_CASE("efficacy improvement is monotone and below one") {
    for (double eta0 : {0.0, 0.3, 0.9}) {
        double prev = -1.0;
        for (double f = 0.0; f <= 1.0; f += 0.1) {
            const double eta = improve_efficacy(eta0, 1.5, f);
            CHECK(eta >= eta0);
            CHECK(eta < 1.0);
            CHECK(eta >= prev);
            prev = eta;
        }
        CHECK(improve_efficacy(eta0, 2.0, 0.5) >= improve_efficacy(eta0, 1.0, 0.5));
    }
}

TEST_CASE("technique log success sums selected coverage") {
    const auto m = table({{1, 0}, {1, 0}});

    SUBCASE("nothing selected means success rate one") {
        const auto log_r = technique_log_success(m, {0, 0}, {0.5, 0.4});
        CHECK(log_r[0] == 0.0);
        CHECK(log_r[1] == 0.0);
    }
    SUBCASE("single mitigation at eta 0.5") {
        const auto log_r = technique_log_success(m, {1, 0}, {0.5, 0.4});
        CHECK(log_r[0] == doctest::Approx(std::log(0.5)).epsilon(1e-12));
        CHECK(log_r[1] == 0.0);
    }
    SUBCASE("two mitigations multiply") {
        const auto log_r = technique_log_success(m, {1, 1}, {0.5, 0.4});
        CHECK(log_r[0] == doctest::Approx(std::log(0.30)).epsilon(1e-9));
    }
}

TEST_CASE("fused budget form matches the spelled-out route") {
    const auto m = table({{1, 0}});

    SUBCASE("frozen single-term value") {
        const auto p = build_p_matrix(m, {0.0});
        const auto log_r = technique_log_success_budgeted(m, p, {1}, {0.5}, 2.0);
        CHECK(log_r[0] == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("zero budget reduces to the initial efficacies") {
        const auto p = build_p_matrix(m, {0.25});
        const auto fused = technique_log_success_budgeted(m, p, {1}, {0.0}, 3.0);
        const auto direct = technique_log_success(m, {1}, {0.25});
        CHECK(fused[0] == doctest::Approx(direct[0]).epsilon(1e-12));
    }
    SUBCASE("nothing selected gives the zero vector") {
        const auto p = build_p_matrix(m, {0.25});
        const auto fused = technique_log_success_budgeted(m, p, {0}, {0.7}, 3.0);
        CHECK(fused[0] == 0.0);
    }
}

TEST_CASE("sequence log success adds member techniques") {
    const auto s = table({{1, 1, 0}});
    const RealVector log_r = {std::log(0.5), std::log(0.5), std::log(0.9)};
    const auto log_v = sequence_log_success(s, log_r);
    CHECK(log_v[0] == doctest::Approx(-1.386294).epsilon(1e-6));

    CHECK(sequence_log_success(s, {0.0, 0.0, 0.0})[0] == 0.0);
    const auto lone = table({{0, 0, 1}});
    CHECK(sequence_log_success(lone, {std::log(0.5), std::log(0.5), 0.0})[0] == 0.0);
}

TEST_CASE("classification thresholds and vulnerability fraction") {
    const RealVector log_v = {std::log(0.25), std::log(0.05), 0.0};
    const auto cls = classify_and_vulnerability(log_v, 0.1);
    CHECK(cls.highly_likely == std::vector<char>{1, 0, 1});
    CHECK(cls.vulnerability == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    SUBCASE("delta one flags only sure sequences") {
        const auto strict = classify_and_vulnerability({std::log(0.9), 0.0}, 1.0);
        CHECK(strict.highly_likely == std::vector<char>{0, 1});
    }
    SUBCASE("nothing mitigated means full vulnerability") {
        const auto all = classify_and_vulnerability({0.0, 0.0}, 0.5);
        CHECK(all.vulnerability == 1.0);
    }
    SUBCASE("empty sequence set yields zero with a warning") {
        const auto empty = classify_and_vulnerability({}, 0.5);
        CHECK(empty.vulnerability == 0.0);
        CHECK(empty.empty_sequence_warning);
    }
    SUBCASE("boundary value counts as highly likely") {
        const auto edge = classify_and_vulnerability({std::log(0.1)}, 0.1);
        CHECK(edge.highly_likely == std::vector<char>{1});
    }
}

TEST_CASE("log form equals the product form on random draws") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t nm = 1 + rng() % 6;
        const std::size_t nt = 1 + rng() % 6;
        BinaryTable m(nm, nt);
        BinaryVector x(nm, 0);
        RealVector eta(nm, 0.0);
        for (std::size_t i = 0; i < nm; ++i) {
            x[i] = rng() % 2;
            eta[i] = 0.99 * static_cast<double>(rng() % 1000) / 1000.0;
            for (std::size_t k = 0; k < nt; ++k) m(i, k) = rng() % 2;
        }
        const auto log_r = technique_log_success(m, x, eta);
        for (std::size_t k = 0; k < nt; ++k) {
            double product = 1.0;
            for (std::size_t i = 0; i < nm; ++i)
                product *= 1.0 - static_cast<double>(x[i] * m(i, k)) * eta[i];
            CHECK(std::exp(log_r[k]) == doctest::Approx(product).epsilon(1e-9));
            CHECK(log_r[k] <= 0.0);
        }
    }
}

TEST_CASE("two-step and fused routes agree on random draws") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t nm = 1 + rng() % 6;
        const std::size_t nt = 1 + rng() % 6;
        BinaryTable m(nm, nt);
        BinaryVector x(nm, 0);
        RealVector eta0(nm, 0.0), f(nm, 0.0);
        const double lambda = static_cast<double>(rng() % 400) / 100.0;
        for (std::size_t i = 0; i < nm; ++i) {
            x[i] = rng() % 2;
            eta0[i] = 0.99 * static_cast<double>(rng() % 1000) / 1000.0;
            f[i] = static_cast<double>(rng() % 1001) / 1000.0;
            for (std::size_t k = 0; k < nt; ++k) m(i, k) = rng() % 2;
        }
        const auto p = build_p_matrix(m, eta0);
        const auto fused = technique_log_success_budgeted(m, p, x, f, lambda);
        const auto two_step = technique_log_success(m, x, improve_efficacy(eta0, lambda, f));
        for (std::size_t k = 0; k < nt; ++k)
            CHECK(fused[k] == doctest::Approx(two_step[k]).epsilon(1e-9));
    }
}

TEST_CASE("selecting more mitigation never raises a success rate") {
    const auto inst = testsupport::random_instance(99);
    const BudgetVector b = BudgetVector::uniform(inst.n_sectors());
    BinaryVector x(inst.n_mitigations(), 0);
    auto prev = score_assignment(inst, x, b);
    for (std::size_t i = 0; i < inst.n_mitigations(); ++i) {
        x[i] = 1;
        const auto next = score_assignment(inst, x, b);
        for (std::size_t k = 0; k < inst.n_techniques(); ++k)
            CHECK(next.log_r[k] <= prev.log_r[k] + 1e-12);
        CHECK(next.highly_likely_count <= prev.highly_likely_count);
        prev = next;
    }
}

TEST_CASE("raising skill or budget never raises a success rate") {
    const auto m = table({{1, 1, 0}, {0, 1, 1}});
    const RealVector eta0 = {0.2, 0.4};
    const BinaryVector x = {1, 1};
    const auto p = build_p_matrix(m, eta0);
    RealVector prev(3, 1.0);
    for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
        const auto log_r = technique_log_success_budgeted(m, p, x, {0.3, 0.6}, lambda);
        for (std::size_t k = 0; k < 3; ++k) CHECK(log_r[k] <= prev[k] + 1e-12);
        prev = log_r;
    }
    const auto low_f = technique_log_success_budgeted(m, p, x, {0.3, 0.6}, 1.0);
    const auto high_f = technique_log_success_budgeted(m, p, x, {0.5, 0.9}, 1.0);
    for (std::size_t k = 0; k < 3; ++k) CHECK(high_f[k] <= low_f[k] + 1e-12);
}

TEST_CASE("duplicating the sequence set leaves vulnerability unchanged") {
    const RealVector log_v = {std::log(0.25), std::log(0.05), 0.0};
    RealVector doubled = log_v;
    doubled.insert(doubled.end(), log_v.begin(), log_v.end());
    const auto one = classify_and_vulnerability(log_v, 0.1);
    const auto two = classify_and_vulnerability(doubled, 0.1);
    CHECK(one.vulnerability == doctest::Approx(two.vulnerability).epsilon(1e-15));
}
