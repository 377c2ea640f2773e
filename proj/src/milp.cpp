#include "secalloc/milp.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "secalloc/errors.hpp"

namespace secalloc {

RealVector compute_big_m(const ProblemInstance& instance) {
    const double delta_prime = std::log(instance.delta);

    // Per-technique weight: what selecting every covering mitigation at full
    // budget can subtract from that technique's log success rate.
    RealVector tech_weight(instance.n_techniques(), 0.0);
    for (std::size_t i = 0; i < instance.n_mitigations(); ++i) {
        const double base = std::abs(std::log1p(-instance.eta0[i])) + instance.lambda;
        for (std::size_t k = 0; k < instance.n_techniques(); ++k)
            if (instance.M(i, k)) tech_weight[k] += base;
    }

    RealVector big_m(instance.n_sequences(), 0.0);
    for (std::size_t l = 0; l < instance.n_sequences(); ++l) {
        double range = 0.0;
        for (std::size_t k = 0; k < instance.n_techniques(); ++k)
            if (instance.seqs.S(l, k)) range += tech_weight[k];
        big_m[l] = std::abs(delta_prime) + kEpsilonStrict + range;
    }
    return big_m;
}

MilpModel build_model(const ProblemInstance& instance) {
    if (instance.n_sequences() == 0)
        throw ValidationError("cannot build a model over an empty sequence set");

    const std::size_t nc = instance.n_sectors();
    const std::size_t nm = instance.n_mitigations();
    const std::size_t nd = instance.n_sequences();

    MilpModel model;
    model.n_sectors = nc;
    model.n_mitigations = nm;
    model.n_sequences = nd;
    model.b_offset = 0;
    model.f_offset = nc;
    model.x_offset = nc + nm;
    model.h_offset = nc + 2 * nm;
    model.y_offset = nc + 3 * nm;
    model.delta_prime = std::log(instance.delta);
    model.epsilon_strict = kEpsilonStrict;
    model.big_m = compute_big_m(instance);
    model.tiebreak_weight =
        instance.options.sparse_tiebreak && nm > 0 ? 1.0 / (2.0 * static_cast<double>(nm)) : 0.0;

    model.vars.reserve(nc + 3 * nm + nd);
    for (std::size_t j = 0; j < nc; ++j)
        model.vars.push_back({"b" + std::to_string(j), 0.0, 1.0, false});
    for (std::size_t i = 0; i < nm; ++i)
        model.vars.push_back({"f" + std::to_string(i), 0.0, 1.0, false});
    for (std::size_t i = 0; i < nm; ++i)
        model.vars.push_back({"x" + std::to_string(i), 0.0, 1.0, true});
    for (std::size_t i = 0; i < nm; ++i)
        model.vars.push_back({"h" + std::to_string(i), 0.0, 1.0, false});
    for (std::size_t l = 0; l < nd; ++l)
        model.vars.push_back({"y" + std::to_string(l), 0.0, 1.0, true});

    model.objective.assign(model.vars.size(), 0.0);
    for (std::size_t l = 0; l < nd; ++l) model.objective[model.idx_y(l)] = 1.0;
    for (std::size_t i = 0; i < nm; ++i) model.objective[model.idx_x(i)] = model.tiebreak_weight;

    // Product linearization: h_i <= x_i, h_i >= 0, h_i <= f_i, h_i >= x_i - (1 - f_i).
    for (std::size_t i = 0; i < nm; ++i) {
        const std::string tag = std::to_string(i);
        model.constraints.push_back({"mc_" + tag + "_1",
                                     {{model.idx_h(i), 1.0}, {model.idx_x(i), -1.0}},
                                     Sense::LessEqual,
                                     0.0});
        model.constraints.push_back(
            {"mc_" + tag + "_2", {{model.idx_h(i), -1.0}}, Sense::LessEqual, 0.0});
        model.constraints.push_back({"mc_" + tag + "_3",
                                     {{model.idx_h(i), 1.0}, {model.idx_f(i), -1.0}},
                                     Sense::LessEqual,
                                     0.0});
        model.constraints.push_back(
            {"mc_" + tag + "_4",
             {{model.idx_x(i), 1.0}, {model.idx_f(i), 1.0}, {model.idx_h(i), -1.0}},
             Sense::LessEqual,
             1.0});
    }

    // f_i = (sum_j C[i][j] b_j) / |sectors of i|.
    for (std::size_t i = 0; i < nm; ++i) {
        Constraint c;
        c.name = "fdef_" + std::to_string(i);
        c.sense = Sense::Equal;
        c.rhs = 0.0;
        c.terms.push_back({model.idx_f(i), 1.0});
        const double den = static_cast<double>(instance.C.row_sum(i));
        for (std::size_t j = 0; j < nc; ++j)
            if (instance.C(i, j)) c.terms.push_back({model.idx_b(j), -1.0 / den});
        model.constraints.push_back(std::move(c));
    }

    {
        Constraint c;
        c.name = "simplex";
        c.sense = Sense::Equal;
        c.rhs = 1.0;
        for (std::size_t j = 0; j < nc; ++j) c.terms.push_back({model.idx_b(j), 1.0});
        model.constraints.push_back(std::move(c));
    }

    // Indicator rows over l_l = [S (P^T x - lambda M^T h)]_l.
    for (std::size_t l = 0; l < nd; ++l) {
        std::vector<double> px(nm, 0.0); // coefficient of x_i in l_l
        std::vector<double> ph(nm, 0.0); // coefficient of h_i in l_l
        for (std::size_t k = 0; k < instance.n_techniques(); ++k) {
            if (!instance.seqs.S(l, k)) continue;
            for (std::size_t i = 0; i < nm; ++i) {
                if (!instance.M(i, k)) continue;
                px[i] += instance.P(i, k);
                ph[i] -= instance.lambda;
            }
        }

        const std::string tag = std::to_string(l);
        Constraint up; // l_l - K_l y_l <= delta' - eps
        up.name = "ind_" + tag + "_1";
        up.sense = Sense::LessEqual;
        up.rhs = model.delta_prime - model.epsilon_strict;
        Constraint down; // -l_l + K_l y_l <= K_l - delta'
        down.name = "ind_" + tag + "_2";
        down.sense = Sense::LessEqual;
        down.rhs = model.big_m[l] - model.delta_prime;
        for (std::size_t i = 0; i < nm; ++i) {
            if (px[i] != 0.0) {
                up.terms.push_back({model.idx_x(i), px[i]});
                down.terms.push_back({model.idx_x(i), -px[i]});
            }
            if (ph[i] != 0.0) {
                up.terms.push_back({model.idx_h(i), ph[i]});
                down.terms.push_back({model.idx_h(i), -ph[i]});
            }
        }
        up.terms.push_back({model.idx_y(l), -model.big_m[l]});
        down.terms.push_back({model.idx_y(l), model.big_m[l]});
        model.constraints.push_back(std::move(up));
        model.constraints.push_back(std::move(down));
    }

    if (instance.options.max_selected) {
        Constraint c;
        c.name = "card";
        c.sense = Sense::LessEqual;
        c.rhs = static_cast<double>(*instance.options.max_selected);
        for (std::size_t i = 0; i < nm; ++i) c.terms.push_back({model.idx_x(i), 1.0});
        model.constraints.push_back(std::move(c));
    }

    return model;
}

McCormickInterval mccormick_interval(double x, double f) {
    McCormickInterval iv;
    iv.lo = std::max(0.0, x - (1.0 - f));
    iv.hi = std::min(x, f);
    return iv;
}

double mccormick_exactness_check(double x, double f) {
    if (x != 0.0 && x != 1.0) throw ConfigError("x must be binary");
    if (f < 0.0 || f > 1.0) throw ConfigError("f must lie in [0, 1]");
    const auto iv = mccormick_interval(x, f);
    const double product = f * x;
    if (iv.width() > 1e-12 || std::abs(iv.lo - product) > 1e-12)
        throw SolverBugError("product linearization did not collapse to f*x");
    return product;
}

namespace {

std::string fmt_coef(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void append_terms(std::ostringstream& out, const MilpModel& model,
                  const std::vector<LinearTerm>& terms) {
    bool first = true;
    for (const auto& t : terms) {
        const double c = t.coef;
        if (first) {
            out << (c < 0 ? "- " : "") << fmt_coef(std::abs(c));
            first = false;
        } else {
            out << (c < 0 ? " - " : " + ") << fmt_coef(std::abs(c));
        }
        out << ' ' << model.vars[t.var].name;
    }
    if (first) out << "0 " << model.vars[0].name;
}

} // namespace

std::string export_lp(const MilpModel& model) {
    std::ostringstream out;
    out << "\\ budget-partition mitigation MILP\n";
    out << "Minimize\n obj: ";
    std::vector<LinearTerm> obj_terms;
    for (std::size_t v = 0; v < model.objective.size(); ++v)
        if (model.objective[v] != 0.0) obj_terms.push_back({v, model.objective[v]});
    append_terms(out, model, obj_terms);
    out << "\nSubject To\n";
    for (const auto& c : model.constraints) {
        out << ' ' << c.name << ": ";
        append_terms(out, model, c.terms);
        switch (c.sense) {
            case Sense::LessEqual: out << " <= "; break;
            case Sense::Equal: out << " = "; break;
            case Sense::GreaterEqual: out << " >= "; break;
        }
        out << fmt_coef(c.rhs) << '\n';
    }
    out << "Bounds\n";
    for (const auto& v : model.vars)
        if (!v.integral)
            out << ' ' << fmt_coef(v.lb) << " <= " << v.name << " <= " << fmt_coef(v.ub) << '\n';
    out << "Binaries\n";
    for (const auto& v : model.vars)
        if (v.integral) out << ' ' << v.name << '\n';
    out << "End\n";
    return out.str();
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::TimedOut: return "timed_out";
    }
    return "unknown";
}

Solution extract_solution(const MilpModel& model, const RealVector& incumbent,
                          const ProblemInstance& instance,
                          std::optional<std::size_t> claimed_count) {
    if (incumbent.size() != model.vars.size())
        throw ConfigError("incumbent size does not match the model");

    for (std::size_t v = 0; v < model.vars.size(); ++v) {
        const auto& info = model.vars[v];
        if (incumbent[v] < info.lb - kFeasibilityTol || incumbent[v] > info.ub + kFeasibilityTol)
            throw InfeasibleError("incumbent violates bounds of " + info.name);
        if (info.integral &&
            std::abs(incumbent[v] - std::round(incumbent[v])) > kIntegralityTol)
            throw InfeasibleError("incumbent leaves " + info.name + " fractional");
    }
    for (const auto& c : model.constraints) {
        double lhs = 0.0;
        for (const auto& t : c.terms) lhs += t.coef * incumbent[t.var];
        const double viol = c.sense == Sense::LessEqual      ? lhs - c.rhs
                            : c.sense == Sense::GreaterEqual ? c.rhs - lhs
                                                             : std::abs(lhs - c.rhs);
        if (viol > kFeasibilityTol)
            throw InfeasibleError("incumbent violates row " + c.name);
    }

    Solution sol;
    sol.x.resize(model.n_mitigations);
    for (std::size_t i = 0; i < model.n_mitigations; ++i)
        sol.x[i] = incumbent[model.idx_x(i)] > 0.5 ? 1 : 0;

    // Clamp float dust off b and rescale so the simplex invariant holds exactly.
    RealVector b(model.n_sectors, 0.0);
    double sum = 0.0;
    for (std::size_t j = 0; j < model.n_sectors; ++j) {
        const double v = incumbent[model.idx_b(j)];
        b[j] = v < 1e-12 ? 0.0 : v;
        sum += b[j];
    }
    for (std::size_t j = 0; j < model.n_sectors; ++j) b[j] /= sum;
    BudgetVector budget(b);

    sol.breakdown = score_assignment(instance, sol.x, budget);
    sol.b = budget.values();

    double y_sum = 0.0;
    for (std::size_t l = 0; l < model.n_sequences; ++l)
        y_sum += incumbent[model.idx_y(l)];
    const std::size_t solver_count =
        claimed_count.value_or(static_cast<std::size_t>(std::llround(y_sum)));

    if (solver_count != sol.breakdown.highly_likely_count) {
        // Disagreement is tolerated only for sequences pinned to the
        // threshold boundary, where the indicator rows and the non-strict
        // scoring comparison may legitimately split.
        const double band = 2.0 * kFeasibilityTol + model.epsilon_strict;
        bool explained = !claimed_count.has_value() ||
                         *claimed_count == static_cast<std::size_t>(std::llround(y_sum));
        for (std::size_t l = 0; l < model.n_sequences && explained; ++l) {
            const bool y_flag = incumbent[model.idx_y(l)] > 0.5;
            const bool score_flag = sol.breakdown.highly_likely[l] != 0;
            if (y_flag != score_flag &&
                std::abs(sol.breakdown.log_v[l] - model.delta_prime) > band)
                explained = false;
        }
        if (!explained)
            throw SolverBugError(
                "solver objective " + std::to_string(solver_count) +
                " disagrees with the re-scored count " +
                std::to_string(sol.breakdown.highly_likely_count));
    }

    sol.objective = sol.breakdown.highly_likely_count;
    sol.vulnerability = sol.breakdown.vulnerability;
    double x_sum = 0.0;
    for (auto xi : sol.x) x_sum += xi;
    sol.combined_objective =
        static_cast<double>(sol.objective) + model.tiebreak_weight * x_sum;
    return sol;
}

} // namespace secalloc
