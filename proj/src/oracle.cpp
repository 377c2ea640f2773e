#include "secalloc/oracle.hpp"

#include <cmath>

#include "secalloc/errors.hpp"

namespace secalloc {

std::vector<RealVector> simplex_grid(std::size_t n, double step) {
    if (n == 0) throw ConfigError("simplex grid needs at least one dimension");
    if (!(step > 0.0) || step > 1.0) throw ConfigError("grid step must lie in (0, 1]");
    const double ratio = 1.0 / step;
    const long long resolution = std::llround(ratio);
    if (resolution < 1 || std::abs(ratio - static_cast<double>(resolution)) > 1e-9)
        throw ConfigError("grid step must divide 1 exactly (e.g. 0.5, 0.25, 0.1)");

    std::vector<RealVector> grid;
    RealVector point(n, 0.0);
    std::vector<long long> counts(n, 0);

    // Lexicographic compositions of `resolution` into n parts.
    auto emit = [&](auto&& self, std::size_t pos, long long remaining) -> void {
        if (pos + 1 == n) {
            counts[pos] = remaining;
            for (std::size_t j = 0; j < n; ++j)
                point[j] = static_cast<double>(counts[j]) / static_cast<double>(resolution);
            grid.push_back(point);
            return;
        }
        for (long long c = remaining; c >= 0; --c) {
            counts[pos] = c;
            self(self, pos + 1, remaining - c);
        }
    };
    emit(emit, 0, resolution);
    return grid;
}

double default_grid_step(std::size_t n_sectors) {
    if (n_sectors <= 3) return 0.1;
    if (n_sectors <= 5) return 0.25;
    return 0.5;
}

OracleResult exhaustive_optimum(const ProblemInstance& instance, double grid_step) {
    const std::size_t nm = instance.n_mitigations();
    if (nm >= 40) throw BudgetExceededError("too many mitigations to enumerate");

    const auto grid = simplex_grid(instance.n_sectors(), grid_step);
    const double work =
        std::ldexp(static_cast<double>(grid.size()), static_cast<int>(nm));
    if (work > 1e7)
        throw BudgetExceededError(
            "enumeration would take " + std::to_string(work) +
            " evaluations; the guard allows at most 1e7");

    OracleResult result;
    result.grid_step = grid_step;
    result.best_objective = instance.n_sequences() + 1; // worse than anything attainable

    BinaryVector x(nm, 0);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nm); ++mask) {
        for (std::size_t i = 0; i < nm; ++i) x[i] = (mask >> i) & 1u;
        for (const auto& b : grid) {
            ++result.evaluations;
            const auto breakdown = score_assignment(instance, x, BudgetVector(b));
            if (breakdown.highly_likely_count < result.best_objective) {
                result.best_objective = breakdown.highly_likely_count;
                result.witnesses.clear();
            }
            if (breakdown.highly_likely_count == result.best_objective &&
                result.witnesses.size() < 100)
                result.witnesses.emplace_back(x, b);
        }
    }
    return result;
}

} // namespace secalloc
