#include "secalloc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

#include "secalloc/errors.hpp"

namespace secalloc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Incumbent {
    RealVector vars;
    double combined = 0.0;
    std::size_t count = 0;
    BinaryVector x;
    bool valid = false;
};

bool lex_smaller(const BinaryVector& a, const BinaryVector& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Node {
    RealVector lower;
    RealVector upper;
    double bound = 0.0;
    std::size_t depth = 0;
    bool has_lp = false;
    LpResult lp;
    // Branching bookkeeping for pseudo-cost learning.
    std::ptrdiff_t branch_var = -1;
    bool branch_up = false;
    double parent_obj = 0.0;
    double parent_frac = 0.0;
};

// Lower bound on the subtree combined objective implied by the relaxation
// value: the count part is integral and the tie-break mass is below 1/2.
double strengthen_bound(double lp_value, double tiebreak_weight) {
    if (tiebreak_weight == 0.0) return std::ceil(lp_value - 1e-9);
    return std::max(lp_value, std::ceil(lp_value - 0.5 - 1e-9));
}

// Relaxed per-sequence minimum of l_l over x in [0,1]^N, b on the simplex:
// everything selected, full h, and the budget concentrated on the best
// sector for that sequence. Sound bound for fixing forced y variables.
RealVector relaxed_sequence_minimum(const ProblemInstance& inst) {
    const std::size_t nm = inst.n_mitigations();
    const std::size_t nc = inst.n_sectors();
    const std::size_t nd = inst.n_sequences();

    RealVector out(nd, 0.0);
    for (std::size_t l = 0; l < nd; ++l) {
        double base = 0.0;
        RealVector sector_pull(nc, 0.0);
        for (std::size_t i = 0; i < nm; ++i) {
            double cov = 0.0;
            for (std::size_t k = 0; k < inst.n_techniques(); ++k)
                if (inst.seqs.S(l, k) && inst.M(i, k)) {
                    base += inst.P(i, k);
                    cov += 1.0;
                }
            if (cov == 0.0) continue;
            const double den = static_cast<double>(inst.C.row_sum(i));
            for (std::size_t j = 0; j < nc; ++j)
                if (inst.C(i, j)) sector_pull[j] += cov / den;
        }
        double best_pull = 0.0;
        for (double p : sector_pull) best_pull = std::max(best_pull, p);
        out[l] = base - inst.lambda * best_pull;
    }
    return out;
}

struct BranchChoice {
    std::ptrdiff_t var = -1;
    double frac = 0.0;
};

BranchChoice pick_most_fractional(const Node& node, const RealVector& values,
                                  std::size_t begin, std::size_t count) {
    BranchChoice choice;
    double best_dist = kIntegralityTol;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t v = begin + i;
        if (node.lower[v] == node.upper[v]) continue;
        const double frac = values[v] - std::floor(values[v]);
        const double dist = std::min(frac, 1.0 - frac);
        if (dist > best_dist + 1e-12) {
            best_dist = dist;
            choice.var = static_cast<std::ptrdiff_t>(v);
            choice.frac = values[v];
        }
    }
    return choice;
}

struct PseudoCosts {
    RealVector up_sum, down_sum;
    RealVector up_n, down_n;

    explicit PseudoCosts(std::size_t n)
        : up_sum(n, 0.0), down_sum(n, 0.0), up_n(n, 0.0), down_n(n, 0.0) {}

    double up(std::size_t v) const { return up_n[v] > 0 ? up_sum[v] / up_n[v] : 1.0; }
    double down(std::size_t v) const { return down_n[v] > 0 ? down_sum[v] / down_n[v] : 1.0; }

    void record(std::size_t v, bool upward, double degradation, double distance) {
        if (distance < 1e-9) return;
        const double unit = std::max(degradation, 0.0) / distance;
        if (upward) {
            up_sum[v] += unit;
            up_n[v] += 1.0;
        } else {
            down_sum[v] += unit;
            down_n[v] += 1.0;
        }
    }
};

BranchChoice pick_pseudo_cost(const Node& node, const RealVector& values,
                              const PseudoCosts& costs, std::size_t begin,
                              std::size_t count) {
    BranchChoice choice;
    double best_score = -1.0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t v = begin + i;
        if (node.lower[v] == node.upper[v]) continue;
        const double frac = values[v] - std::floor(values[v]);
        const double dist = std::min(frac, 1.0 - frac);
        if (dist <= kIntegralityTol) continue;
        const double score =
            std::max(costs.up(v) * (1.0 - frac), 1e-6) * std::max(costs.down(v) * frac, 1e-6);
        if (score > best_score + 1e-12) {
            best_score = score;
            choice.var = static_cast<std::ptrdiff_t>(v);
            choice.frac = values[v];
        }
    }
    return choice;
}

LpProblem node_problem(const LpProblem& base, const Node& node) {
    LpProblem p = base;
    p.lower = node.lower;
    p.upper = node.upper;
    return p;
}

} // namespace

void SolverOptions::check() const {
    if (time_limit_seconds <= 0.0) throw ConfigError("time limit must be positive");
    if (node_limit == 0) throw ConfigError("node limit must be positive");
    if (parallel == 0) throw ConfigError("parallel worker count must be positive");
}

RealVector completion_vector(const MilpModel& model, const ProblemInstance& instance,
                             const BinaryVector& x, const BudgetVector& b) {
    RealVector vars(model.vars.size(), 0.0);
    const RealVector f = fractional_budget(instance.C, b);
    for (std::size_t j = 0; j < model.n_sectors; ++j) vars[model.idx_b(j)] = b[j];
    for (std::size_t i = 0; i < model.n_mitigations; ++i) {
        vars[model.idx_f(i)] = f[i];
        vars[model.idx_x(i)] = x[i] ? 1.0 : 0.0;
        vars[model.idx_h(i)] = x[i] ? f[i] : 0.0;
    }
    const auto breakdown = score_assignment(instance, x, b);
    for (std::size_t l = 0; l < model.n_sequences; ++l)
        vars[model.idx_y(l)] = breakdown.highly_likely[l] ? 1.0 : 0.0;
    return vars;
}

Solution greedy_heuristic(const MilpModel& model, const ProblemInstance& instance,
                          const SolverOptions& opts) {
    opts.check();
    const auto t0 = Clock::now();
    const std::size_t nm = model.n_mitigations;
    const std::size_t nc = model.n_sectors;
    const double step = 0.05;
    const std::size_t eval_budget = std::max<std::size_t>(10 * nm * nc, nm + 1);

    const std::size_t walk_budget = eval_budget > nm ? eval_budget - nm : 1;

    BinaryVector x(nm, 1);
    RealVector b = BudgetVector::uniform(nc).values();
    std::size_t evals = 0;

    // Count first; excess of still-likely sequences over the threshold as a
    // tie-break so plateau moves that make progress are accepted.
    auto evaluate = [&](const BinaryVector& xv,
                        const RealVector& bv) -> std::pair<std::size_t, double> {
        ++evals;
        const auto breakdown = score_assignment(instance, xv, BudgetVector(bv));
        double excess = 0.0;
        const double threshold = std::log(instance.delta) - kEpsilonStrict;
        for (double lv : breakdown.log_v) excess += std::max(0.0, lv - threshold);
        return {breakdown.highly_likely_count, excess};
    };

    auto current = evaluate(x, b);

    // A cardinality cap makes the all-ones start infeasible; shed the least
    // useful mitigations first, then walk the budget.
    if (instance.options.max_selected) {
        const std::size_t cap = *instance.options.max_selected;
        std::size_t selected = nm;
        while (selected > cap) {
            std::ptrdiff_t drop = -1;
            auto drop_score = current;
            for (std::size_t i = 0; i < nm && evals < walk_budget; ++i) {
                if (!x[i]) continue;
                x[i] = 0;
                const auto score = evaluate(x, b);
                x[i] = 1;
                if (drop < 0 || score < drop_score) {
                    drop = static_cast<std::ptrdiff_t>(i);
                    drop_score = score;
                }
            }
            if (drop < 0) // out of evaluations: shed the lowest index
                for (std::size_t i = 0; i < nm; ++i)
                    if (x[i]) {
                        drop = static_cast<std::ptrdiff_t>(i);
                        break;
                    }
            x[static_cast<std::size_t>(drop)] = 0;
            --selected;
            current = drop_score;
        }
        current = evaluate(x, b);
    }

    bool improved = true;
    while (improved && evals < walk_budget) {
        improved = false;
        for (std::size_t from = 0; from < nc && evals < walk_budget; ++from) {
            for (std::size_t to = 0; to < nc && evals < walk_budget; ++to) {
                if (to == from) continue;
                if (b[from] < step - 1e-12) break; // accepted moves drain b[from]
                RealVector candidate = b;
                candidate[from] = std::max(0.0, candidate[from] - step);
                candidate[to] += step;
                const auto score = evaluate(x, candidate);
                if (score < current) {
                    b = std::move(candidate);
                    current = score;
                    improved = true;
                }
            }
        }
    }

    // Sparsity pass: drop mitigations whose removal does not raise the count.
    for (std::size_t i = 0; i < nm && evals < eval_budget; ++i) {
        if (!x[i]) continue;
        x[i] = 0;
        const auto score = evaluate(x, b);
        if (score.first <= current.first) {
            current = score;
        } else {
            x[i] = 1;
        }
    }

    BudgetVector budget(b);
    const RealVector vars = completion_vector(model, instance, x, budget);
    Solution sol = extract_solution(model, vars, instance);
    sol.status = SolveStatus::Feasible;
    sol.gap = 1.0;
    sol.seconds = seconds_since(t0);
    return sol;
}

Solution branch_and_bound(const MilpModel& model, const ProblemInstance& instance,
                          const SolverOptions& opts) {
    opts.check();
    const auto t0 = Clock::now();
    const LpProblem base = lp_relaxation(model);
    const std::size_t nvars = model.vars.size();

    Node root;
    root.lower.resize(nvars);
    root.upper.resize(nvars);
    for (std::size_t v = 0; v < nvars; ++v) {
        root.lower[v] = model.vars[v].lb;
        root.upper[v] = model.vars[v].ub;
    }

    // Bound tightening: a sequence whose relaxed minimum stays above the
    // threshold can never be pushed below it, so its indicator is forced on.
    const RealVector seq_min = relaxed_sequence_minimum(instance);
    double forced = 0.0;
    for (std::size_t l = 0; l < model.n_sequences; ++l) {
        if (seq_min[l] > model.delta_prime - model.epsilon_strict + kFeasibilityTol) {
            root.lower[model.idx_y(l)] = 1.0;
            forced += 1.0;
        }
    }

    Incumbent best;
    auto offer_incumbent = [&](const RealVector& vars) {
        Solution cand = extract_solution(model, vars, instance);
        const double combined = cand.combined_objective;
        if (!best.valid || combined < best.combined - 1e-12 ||
            (std::abs(combined - best.combined) <= 1e-12 && lex_smaller(cand.x, best.x))) {
            best.vars = vars;
            best.combined = combined;
            best.count = cand.objective;
            best.x = cand.x;
            best.valid = true;
        }
    };

    // Feasibility anchor: nothing selected, uniform budget, everything flagged.
    {
        const BudgetVector uniform = BudgetVector::uniform(model.n_sectors);
        offer_incumbent(completion_vector(model, instance, BinaryVector(model.n_mitigations, 0),
                                          uniform));
    }
    if (opts.heuristic_enabled) {
        const Solution heur = greedy_heuristic(model, instance, opts);
        offer_incumbent(completion_vector(model, instance, heur.x, BudgetVector(heur.b)));
    }

    PseudoCosts costs(nvars);
    std::vector<Node> stack;
    root.bound = forced; // valid before the root relaxation is solved
    stack.push_back(root);

    std::size_t explored = 0;
    bool limits_hit = false;

    auto solve_node_lp = [&](Node& node) {
        if (node.has_lp) return;
        node.lp = solve_lp(node_problem(base, node), opts.lp_iteration_limit);
        node.has_lp = true;
    };

    while (!stack.empty()) {
        if (explored >= opts.node_limit || seconds_since(t0) > opts.time_limit_seconds) {
            limits_hit = true;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        if (best.valid && node.bound >= best.combined - 1e-9) continue;

        ++explored;
        solve_node_lp(node);

        if (opts.branching == SolverOptions::Branching::PseudoCost && node.branch_var >= 0 &&
            node.lp.status == LpStatus::Optimal) {
            const double frac = node.parent_frac - std::floor(node.parent_frac);
            costs.record(static_cast<std::size_t>(node.branch_var), node.branch_up,
                         node.lp.objective - node.parent_obj,
                         node.branch_up ? 1.0 - frac : frac);
        }

        if (node.lp.status == LpStatus::Infeasible) continue;
        if (node.lp.status == LpStatus::Unbounded)
            throw NumericalError("relaxation reported unbounded on a box-bounded model");

        double node_bound = node.bound;
        bool have_values = node.lp.status == LpStatus::Optimal;
        if (have_values)
            node_bound = std::max(node_bound,
                                  strengthen_bound(node.lp.objective, model.tiebreak_weight));
        if (best.valid && node_bound >= best.combined - 1e-9) continue;

        BranchChoice choice;
        if (have_values) {
            if (opts.branching == SolverOptions::Branching::PseudoCost) {
                choice = pick_pseudo_cost(node, node.lp.values, costs, model.x_offset,
                                          model.n_mitigations);
                if (choice.var < 0)
                    choice = pick_pseudo_cost(node, node.lp.values, costs, model.y_offset,
                                              model.n_sequences);
            } else {
                choice = pick_most_fractional(node, node.lp.values, model.x_offset,
                                              model.n_mitigations);
                if (choice.var < 0)
                    choice = pick_most_fractional(node, node.lp.values, model.y_offset,
                                                  model.n_sequences);
            }
        } else {
            // Relaxation hit its iteration cap: branch on the first free binary.
            for (std::size_t i = 0; i < model.n_mitigations && choice.var < 0; ++i)
                if (node.lower[model.idx_x(i)] != node.upper[model.idx_x(i)])
                    choice.var = static_cast<std::ptrdiff_t>(model.idx_x(i));
            for (std::size_t l = 0; l < model.n_sequences && choice.var < 0; ++l)
                if (node.lower[model.idx_y(l)] != node.upper[model.idx_y(l)])
                    choice.var = static_cast<std::ptrdiff_t>(model.idx_y(l));
            choice.frac = 0.5;
        }

        if (choice.var < 0) {
            if (!have_values) continue; // no values and nothing to branch on
            // Integral relaxation: complete through the scoring path so the
            // incumbent is exactly feasible, then close the node.
            BinaryVector x(model.n_mitigations, 0);
            for (std::size_t i = 0; i < model.n_mitigations; ++i)
                x[i] = node.lp.values[model.idx_x(i)] > 0.5 ? 1 : 0;
            RealVector b(model.n_sectors, 0.0);
            double sum = 0.0;
            for (std::size_t j = 0; j < model.n_sectors; ++j) {
                b[j] = std::max(0.0, node.lp.values[model.idx_b(j)]);
                sum += b[j];
            }
            for (auto& v : b) v /= sum;
            offer_incumbent(completion_vector(model, instance, x, BudgetVector(b)));
            continue;
        }

        const std::size_t v = static_cast<std::size_t>(choice.var);
        const double parent_obj = have_values ? node.lp.objective : node_bound;
        Node down = node;
        down.upper[v] = 0.0;
        down.lower[v] = 0.0;
        down.bound = node_bound;
        down.depth = node.depth + 1;
        down.has_lp = false;
        down.branch_var = choice.var;
        down.branch_up = false;
        down.parent_obj = parent_obj;
        down.parent_frac = choice.frac;
        Node up = node;
        up.lower[v] = 1.0;
        up.upper[v] = 1.0;
        up.bound = node_bound;
        up.depth = node.depth + 1;
        up.has_lp = false;
        up.branch_var = choice.var;
        up.branch_up = true;
        up.parent_obj = parent_obj;
        up.parent_frac = choice.frac;

        if (opts.parallel >= 2) {
            // Pre-solve both child relaxations concurrently. Results are
            // identical to the sequential solves, so the tree is unchanged.
            auto fut = std::async(std::launch::async, [&base, &up, &opts]() {
                return solve_lp(node_problem(base, up), opts.lp_iteration_limit);
            });
            down.lp = solve_lp(node_problem(base, down), opts.lp_iteration_limit);
            down.has_lp = true;
            up.lp = fut.get();
            up.has_lp = true;
        }

        const bool is_x_var = v >= model.x_offset && v < model.x_offset + model.n_mitigations;
        if (is_x_var) {
            // Explore x = 1 first: more mitigation finds low counts early.
            stack.push_back(std::move(down));
            stack.push_back(std::move(up));
        } else {
            stack.push_back(std::move(up));
            stack.push_back(std::move(down));
        }
    }

    if (!best.valid) throw InfeasibleError("no feasible point found; the anchor must exist");

    Solution sol = extract_solution(model, best.vars, instance);
    sol.nodes_explored = explored;
    sol.seconds = seconds_since(t0);
    if (!limits_hit) {
        sol.status = SolveStatus::Optimal;
        sol.gap = 0.0;
    } else {
        sol.status = SolveStatus::TimedOut;
        // Open subtrees carry valid bounds; everything else is already beaten
        // by the incumbent.
        double lb = sol.combined_objective;
        for (const auto& n : stack) lb = std::min(lb, std::max(n.bound, forced));
        sol.gap = std::max(0.0, (sol.combined_objective - lb) /
                                    std::max(1.0, sol.combined_objective));
    }
    return sol;
}

} // namespace secalloc
