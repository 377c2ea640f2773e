#include "secalloc/simplex.hpp"

#include <cmath>

#include "secalloc/errors.hpp"

namespace secalloc {

namespace {

constexpr double kTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kPhase1Tol = 1e-7;
constexpr int kDegenerateLimit = 60;

enum class ColState : std::uint8_t { AtLower, AtUpper, Basic };

struct Tableau {
    std::size_t m = 0;     // rows
    std::size_t ncols = 0; // structural + slack + artificial columns
    std::size_t n_struct = 0;
    std::vector<double> coef; // m x ncols dictionary
    RealVector basic_value;   // per row
    std::vector<std::size_t> basis;
    std::vector<ColState> state;
    std::vector<std::uint8_t> artificial;
    std::vector<std::uint8_t> blocked; // never eligible to enter
    RealVector width;                  // ub - lb per column (may be +inf)
    RealVector cost;                   // phase-dependent
    RealVector reduced;

    double& at(std::size_t r, std::size_t c) { return coef[r * ncols + c]; }
    double at(std::size_t r, std::size_t c) const { return coef[r * ncols + c]; }

    double column_value(std::size_t c) const {
        switch (state[c]) {
            case ColState::AtLower: return 0.0;
            case ColState::AtUpper: return width[c];
            case ColState::Basic: break;
        }
        for (std::size_t r = 0; r < m; ++r)
            if (basis[r] == c) return basic_value[r];
        return 0.0;
    }

    void recompute_reduced() {
        reduced = cost;
        for (std::size_t r = 0; r < m; ++r) {
            const double cb = cost[basis[r]];
            if (cb == 0.0) continue;
            for (std::size_t c = 0; c < ncols; ++c) reduced[c] -= cb * at(r, c);
        }
        for (std::size_t r = 0; r < m; ++r) reduced[basis[r]] = 0.0;
    }
};

struct Pivoter {
    Tableau& tab;
    int degenerate_run = 0;
    bool bland = false;

    explicit Pivoter(Tableau& t) : tab(t) {}

    // -1 when the current phase objective is optimal.
    std::ptrdiff_t choose_entering() const {
        std::ptrdiff_t best = -1;
        double best_score = kTol;
        for (std::size_t c = 0; c < tab.ncols; ++c) {
            if (tab.state[c] == ColState::Basic || tab.blocked[c]) continue;
            if (tab.width[c] <= 0.0) continue; // fixed variable
            const double r = tab.reduced[c];
            const bool eligible = (tab.state[c] == ColState::AtLower && r < -kTol) ||
                                  (tab.state[c] == ColState::AtUpper && r > kTol);
            if (!eligible) continue;
            if (bland) return static_cast<std::ptrdiff_t>(c);
            if (std::abs(r) > best_score) {
                best_score = std::abs(r);
                best = static_cast<std::ptrdiff_t>(c);
            }
        }
        return best;
    }

    void apply_pivot(std::size_t row, std::size_t col) {
        const double piv = tab.at(row, col);
        const double inv = 1.0 / piv;
        for (std::size_t c = 0; c < tab.ncols; ++c) tab.at(row, c) *= inv;
        for (std::size_t r = 0; r < tab.m; ++r) {
            if (r == row) continue;
            const double factor = tab.at(r, col);
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < tab.ncols; ++c)
                tab.at(r, c) -= factor * tab.at(row, c);
        }
        const double rfac = tab.reduced[col];
        if (rfac != 0.0)
            for (std::size_t c = 0; c < tab.ncols; ++c)
                tab.reduced[c] -= rfac * tab.at(row, c);

        tab.state[tab.basis[row]] = ColState::AtLower; // caller fixes the exact side
        tab.state[col] = ColState::Basic;
        tab.basis[row] = col;
    }

    // One simplex step; returns false when optimal, throws on unbounded.
    bool step() {
        const std::ptrdiff_t entering = choose_entering();
        if (entering < 0) return false;
        const std::size_t e = static_cast<std::size_t>(entering);
        const double dir = tab.state[e] == ColState::AtLower ? 1.0 : -1.0;

        double t_limit = tab.width[e]; // bound-flip distance (may be +inf)
        std::ptrdiff_t leave_row = -1;
        bool leave_to_upper = false;

        for (std::size_t r = 0; r < tab.m; ++r) {
            const double g = dir * tab.at(r, e);
            double t_row = kLpInfinity;
            bool to_upper = false;
            if (g > kPivotTol) {
                t_row = tab.basic_value[r] / g;
            } else if (g < -kPivotTol) {
                const double w = tab.width[tab.basis[r]];
                if (w == kLpInfinity) continue;
                t_row = (w - tab.basic_value[r]) / (-g);
                to_upper = true;
            } else {
                continue;
            }
            if (t_row < -1e-12) t_row = 0.0;
            const bool better =
                t_row < t_limit - 1e-12 ||
                (leave_row >= 0 && t_row < t_limit + 1e-12 &&
                 tab.basis[r] < tab.basis[static_cast<std::size_t>(leave_row)]);
            if (t_row < t_limit - 1e-12 || (better && leave_row >= 0)) {
                t_limit = std::max(t_row, 0.0);
                leave_row = static_cast<std::ptrdiff_t>(r);
                leave_to_upper = to_upper;
            }
        }

        if (t_limit == kLpInfinity)
            throw std::domain_error("unbounded");

        if (t_limit < kTol) {
            ++degenerate_run;
            if (degenerate_run > kDegenerateLimit) bland = true;
        } else {
            degenerate_run = 0;
            bland = false;
        }

        if (leave_row < 0) {
            // Bound flip: the entering variable crosses to its other bound.
            for (std::size_t r = 0; r < tab.m; ++r)
                tab.basic_value[r] -= dir * tab.at(r, e) * t_limit;
            tab.state[e] =
                tab.state[e] == ColState::AtLower ? ColState::AtUpper : ColState::AtLower;
            return true;
        }

        const std::size_t row = static_cast<std::size_t>(leave_row);
        const double entering_value =
            (tab.state[e] == ColState::AtLower ? 0.0 : tab.width[e]) + dir * t_limit;
        const std::size_t leaving = tab.basis[row];
        for (std::size_t r = 0; r < tab.m; ++r) {
            if (r == row) continue;
            tab.basic_value[r] -= dir * tab.at(r, e) * t_limit;
            if (tab.basic_value[r] < 0.0 && tab.basic_value[r] > -1e-9)
                tab.basic_value[r] = 0.0;
        }
        apply_pivot(row, e);
        tab.basic_value[row] = entering_value;
        tab.state[leaving] = leave_to_upper ? ColState::AtUpper : ColState::AtLower;
        return true;
    }
};

} // namespace

LpProblem lp_relaxation(const MilpModel& model) {
    LpProblem lp;
    lp.objective = model.objective;
    lp.rows = model.constraints;
    lp.lower.reserve(model.vars.size());
    lp.upper.reserve(model.vars.size());
    for (const auto& v : model.vars) {
        lp.lower.push_back(v.lb);
        lp.upper.push_back(v.ub);
    }
    lp.start_at_upper.assign(model.vars.size(), 0);
    for (std::size_t l = 0; l < model.n_sequences; ++l)
        lp.start_at_upper[model.idx_y(l)] = 1;
    return lp;
}

LpResult solve_lp(const LpProblem& problem, std::size_t iteration_limit) {
    const std::size_t n = problem.objective.size();
    const std::size_t m = problem.rows.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (!(problem.lower[j] <= problem.upper[j]))
            throw ConfigError("variable " + std::to_string(j) + " has crossed bounds");
        if (!std::isfinite(problem.lower[j]))
            throw ConfigError("variable lower bounds must be finite");
    }

    // Columns: structurals (shifted to lower bound 0), one slack per
    // inequality row, artificials appended as needed.
    std::size_t n_slacks = 0;
    for (const auto& row : problem.rows)
        if (row.sense != Sense::Equal) ++n_slacks;

    Tableau tab;
    tab.m = m;
    tab.n_struct = n;
    tab.ncols = n + n_slacks; // artificial columns appended below
    std::vector<std::vector<double>> raw(m, std::vector<double>());
    RealVector rhs(m, 0.0);

    tab.width.assign(n + n_slacks, kLpInfinity);
    tab.state.assign(n + n_slacks, ColState::AtLower);
    for (std::size_t j = 0; j < n; ++j) {
        tab.width[j] = problem.upper[j] - problem.lower[j];
        if (!problem.start_at_upper.empty() && problem.start_at_upper[j] &&
            std::isfinite(tab.width[j]) && tab.width[j] > 0.0)
            tab.state[j] = ColState::AtUpper;
    }

    // Start values of the structural columns (shifted space).
    RealVector start(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        if (tab.state[j] == ColState::AtUpper) start[j] = tab.width[j];

    std::vector<double> dense(n + n_slacks, 0.0);
    std::vector<std::ptrdiff_t> slack_of_row(m, -1);
    std::size_t next_slack = n;
    std::vector<std::size_t> artificial_rows;

    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = problem.rows[r];
        std::fill(dense.begin(), dense.end(), 0.0);
        double shift = 0.0;
        for (const auto& t : row.terms) {
            dense[t.var] += t.coef;
            shift += t.coef * problem.lower[t.var];
        }
        double rr = row.rhs - shift;
        if (row.sense == Sense::GreaterEqual) {
            for (std::size_t c = 0; c < n; ++c) dense[c] = -dense[c];
            rr = -rr;
        }
        if (row.sense != Sense::Equal) {
            dense[next_slack] = 1.0;
            tab.width[next_slack] = kLpInfinity;
            slack_of_row[r] = static_cast<std::ptrdiff_t>(next_slack);
            ++next_slack;
        }
        raw[r].assign(dense.begin(), dense.end());
        rhs[r] = rr;
    }

    // Choose the initial basis per row: the slack when it starts feasible,
    // otherwise a fresh artificial.
    tab.basis.assign(m, 0);
    tab.basic_value.assign(m, 0.0);
    std::vector<double> art_sign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        double activity = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (start[j] != 0.0) activity += raw[r][j] * start[j];
        const double residual = rhs[r] - activity;
        if (slack_of_row[r] >= 0 && residual >= 0.0) {
            tab.basis[r] = static_cast<std::size_t>(slack_of_row[r]);
            tab.basic_value[r] = residual;
        } else {
            artificial_rows.push_back(r);
            art_sign[r] = residual >= 0.0 ? 1.0 : -1.0;
            tab.basic_value[r] = std::abs(residual);
        }
    }

    const std::size_t n_art = artificial_rows.size();
    tab.ncols = n + n_slacks + n_art;
    tab.coef.assign(m * tab.ncols, 0.0);
    tab.width.resize(tab.ncols, kLpInfinity);
    tab.state.resize(tab.ncols, ColState::AtLower);
    tab.artificial.assign(tab.ncols, 0);
    tab.blocked.assign(tab.ncols, 0);

    {
        std::size_t next_art = n + n_slacks;
        for (std::size_t r : artificial_rows) {
            tab.basis[r] = next_art;
            tab.artificial[next_art] = 1;
            ++next_art;
        }
    }
    for (std::size_t r = 0; r < m; ++r) {
        const double sign = art_sign[r] == 0.0 ? 1.0 : art_sign[r];
        for (std::size_t c = 0; c < n + n_slacks; ++c) tab.at(r, c) = sign * raw[r][c];
        if (art_sign[r] != 0.0) tab.at(r, tab.basis[r]) = 1.0;
        tab.state[tab.basis[r]] = ColState::Basic;
    }

    LpResult result;
    Pivoter pivoter(tab);

    auto run_phase = [&](std::size_t limit) -> bool {
        while (result.iterations < limit) {
            bool moved;
            try {
                moved = pivoter.step();
            } catch (const std::domain_error&) {
                result.status = LpStatus::Unbounded;
                return false;
            }
            if (!moved) return true; // phase optimal
            ++result.iterations;
        }
        result.status = LpStatus::IterationLimit;
        return false;
    };

    if (n_art > 0) {
        tab.cost.assign(tab.ncols, 0.0);
        for (std::size_t c = n + n_slacks; c < tab.ncols; ++c) tab.cost[c] = 1.0;
        tab.recompute_reduced();
        if (!run_phase(iteration_limit)) return result;

        double infeasibility = 0.0;
        for (std::size_t c = n + n_slacks; c < tab.ncols; ++c)
            infeasibility += tab.column_value(c);
        if (infeasibility > kPhase1Tol) {
            result.status = LpStatus::Infeasible;
            return result;
        }

        // Drive leftover artificials out of the basis where a pivot exists.
        for (std::size_t r = 0; r < m; ++r) {
            if (!tab.artificial[tab.basis[r]]) continue;
            std::ptrdiff_t col = -1;
            for (std::size_t c = 0; c < n + n_slacks; ++c) {
                if (tab.state[c] == ColState::Basic) continue;
                if (std::abs(tab.at(r, c)) > kPivotTol) {
                    col = static_cast<std::ptrdiff_t>(c);
                    break;
                }
            }
            if (col >= 0) {
                const std::size_t leaving = tab.basis[r];
                const std::size_t e = static_cast<std::size_t>(col);
                const double entering_value =
                    tab.state[e] == ColState::AtUpper ? tab.width[e] : 0.0;
                pivoter.apply_pivot(r, e);
                tab.basic_value[r] = entering_value;
                tab.state[leaving] = ColState::AtLower;
            }
        }
        for (std::size_t c = n + n_slacks; c < tab.ncols; ++c) tab.blocked[c] = 1;
    }

    tab.cost.assign(tab.ncols, 0.0);
    for (std::size_t j = 0; j < n; ++j) tab.cost[j] = problem.objective[j];
    tab.recompute_reduced();
    pivoter.degenerate_run = 0;
    pivoter.bland = false;
    if (!run_phase(iteration_limit)) return result;

    result.status = LpStatus::Optimal;
    result.values.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        result.values[j] = problem.lower[j] + tab.column_value(j);
    // Clean accumulated dust off the reported point.
    for (std::size_t j = 0; j < n; ++j) {
        if (result.values[j] < problem.lower[j]) result.values[j] = problem.lower[j];
        if (result.values[j] > problem.upper[j]) result.values[j] = problem.upper[j];
    }
    result.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) result.objective += problem.objective[j] * result.values[j];

    // Safety net: a badly infeasible "optimum" means the tableau drifted.
    for (const auto& row : problem.rows) {
        double lhs = 0.0;
        for (const auto& t : row.terms) lhs += t.coef * result.values[t.var];
        const double viol = row.sense == Sense::LessEqual      ? lhs - row.rhs
                            : row.sense == Sense::GreaterEqual ? row.rhs - lhs
                                                               : std::abs(lhs - row.rhs);
        if (viol > 1e-5)
            throw NumericalError("simplex drifted off the feasible set (row " + row.name + ")");
    }
    return result;
}

} // namespace secalloc
