#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "secalloc/errors.hpp"
#include "secalloc/io.hpp"

namespace {

using secalloc::RunConfig;

void add_model_input(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--model", config.model_path, "Model JSON file")->required();
    cmd->add_flag_callback(
        "--lenient", [&config]() { config.load.strict = false; },
        "Warn on unknown keys and validation findings instead of aborting");
    cmd->add_option("--eta0-cap", config.instance.eta0_cap,
                    "Upper bound accepted for initial efficacies");
}

void add_sequence_input(CLI::App* cmd, RunConfig& config) {
    auto* hag = cmd->add_option("--hag", config.hag_path,
                                "HAG JSON file (enumerated and impact-filtered)");
    auto* seqs = cmd->add_option("--sequences", config.sequences_path,
                                 "Sequence list JSON file (used as-is)");
    hag->excludes(seqs);
    seqs->excludes(hag);
    cmd->add_option("--max-len", config.caps.max_len, "Path length cap for enumeration");
    cmd->add_option("--max-count", config.caps.max_count, "Path count cap for enumeration");
}

void add_solver_flags(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--time-limit", config.solver.time_limit_seconds,
                    "Solver time limit in seconds");
    cmd->add_option("--node-limit", config.solver.node_limit, "Branch-and-bound node limit");
    cmd->add_flag_callback(
        "--heuristic", [&config]() { config.solver.heuristic_enabled = true; },
        "Run the greedy warm-start heuristic (default)");
    cmd->add_flag_callback(
        "--no-heuristic", [&config]() { config.solver.heuristic_enabled = false; },
        "Skip the greedy warm-start heuristic");
    cmd->add_option("--parallel", config.solver.parallel,
                    "Worker threads for sibling relaxations (default 1)");
    cmd->add_flag_callback(
        "--no-sparse-tiebreak", [&config]() { config.instance.sparse_tiebreak = false; },
        "Drop the secondary fewest-mitigations objective");
    cmd->add_option("--max-selected", config.instance.max_selected,
                    "Optional cap on the number of selected mitigations");
    cmd->add_option("--seed", config.solver.rng_seed, "Seed for randomized heuristics");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cybersecurity budget partitioning over attack sequences"};
    app.require_subcommand(1);

    RunConfig config;
    std::vector<double> lambda_grid;
    double lambda_min = 0.25, lambda_max = 4.0;
    std::size_t lambda_steps = 5;

    auto* optimize = app.add_subcommand("optimize", "Solve one budget-partition problem");
    add_model_input(optimize, config);
    add_sequence_input(optimize, config);
    add_solver_flags(optimize, config);
    optimize->add_option("--lambda", config.lambda, "Defender skill factor");
    optimize->add_option("--delta", config.delta, "Highly-likely threshold in (0, 1]");
    optimize->add_option("--out", config.out_path, "Solution JSON output path");

    auto* sweep = app.add_subcommand("sweep", "Solve across a lambda grid, emit CSV");
    add_model_input(sweep, config);
    add_sequence_input(sweep, config);
    add_solver_flags(sweep, config);
    sweep->add_option("--lambda-min", lambda_min, "Smallest lambda")->required();
    sweep->add_option("--lambda-max", lambda_max, "Largest lambda")->required();
    sweep->add_option("--steps", lambda_steps, "Number of grid points")->required();
    sweep->add_option("--delta", config.delta, "Highly-likely threshold in (0, 1]");
    sweep->add_option("--out", config.out_path, "CSV output path");
    sweep->add_flag("--report-timing", config.report_timing,
                    "Emit measured wall time per row (breaks byte determinism)");

    auto* generate = app.add_subcommand("generate", "Synthesize a HAG and its sequences");
    add_model_input(generate, config);
    generate->add_option("--seed", config.seed, "Generator seed")->required();
    generate->add_option("--nodes", config.gen_nodes, "Node count")->required();
    generate->add_option("--density", config.gen_density, "Edge density in (0, 1]")->required();
    generate->add_option("--max-len", config.caps.max_len, "Path length cap");
    generate->add_option("--max-count", config.caps.max_count, "Path count cap");
    generate->add_option("--out-hag", config.out_hag_path, "HAG JSON output path");
    generate->add_option("--out-sequences", config.out_sequences_path,
                         "Impact-filtered sequence list output path");

    auto* verify = app.add_subcommand("verify", "Cross-check the solver against the oracle");
    add_model_input(verify, config);
    add_sequence_input(verify, config);
    add_solver_flags(verify, config);
    verify->add_option("--lambda", config.lambda, "Defender skill factor");
    verify->add_option("--delta", config.delta, "Highly-likely threshold in (0, 1]");
    verify->add_option("--grid-step", config.grid_step,
                       "Budget grid step (default chosen by sector count)");
    verify->add_option("--inject-objective-offset", config.objective_offset,
                       "Testing hook: shift the claimed objective")
        ->group(""); // hidden

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(optimize)) return secalloc::cmd_optimize(config, std::cout);
        if (app.got_subcommand(sweep)) {
            if (lambda_steps == 0) throw secalloc::ConfigError("steps must be positive");
            lambda_grid.clear();
            if (lambda_steps == 1) {
                lambda_grid.push_back(lambda_min);
            } else {
                const double stride =
                    (lambda_max - lambda_min) / static_cast<double>(lambda_steps - 1);
                for (std::size_t i = 0; i < lambda_steps; ++i)
                    lambda_grid.push_back(lambda_min + stride * static_cast<double>(i));
            }
            return secalloc::cmd_sweep(config, lambda_grid, std::cout);
        }
        if (app.got_subcommand(generate)) return secalloc::cmd_generate(config, std::cout);
        if (app.got_subcommand(verify)) return secalloc::cmd_verify(config, std::cout);
    } catch (const secalloc::BudgetExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const secalloc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
