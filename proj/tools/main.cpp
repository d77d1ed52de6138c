#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "dcsopt/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"minimum-cost hierarchical control structure synthesis"};
    app.require_subcommand(1);

    dcsopt::SolveOptions sopt;
    std::optional<int> solve_max_nodes;
    auto* solve = app.add_subcommand("solve", "find a cheap feasible structure for an instance");
    solve->add_option("instance", sopt.instance_path, "instance JSON file")->required();
    solve->add_option("--algo", sopt.algo, "algorithm: aco or exact")->capture_default_str();
    solve->add_option("--loops", sopt.loops, "override loop_count (template instances only)");
    solve->add_option("--levels", sopt.levels, "override the number of levels");
    solve->add_option("--seed", sopt.aco.seed, "random seed")->capture_default_str();
    solve->add_option("--ants", sopt.aco.ants, "ants per iteration")->capture_default_str();
    solve->add_option("--iters", sopt.aco.iterations, "iterations")->capture_default_str();
    solve->add_option("--alpha", sopt.aco.alpha, "trail exponent")->capture_default_str();
    solve->add_option("--beta", sopt.aco.beta, "cost-heuristic exponent")->capture_default_str();
    solve->add_option("--rho", sopt.aco.rho, "evaporation rate")->capture_default_str();
    solve->add_option("--q", sopt.aco.q, "deposit scale (default: first feasible cost)");
    solve->add_option("--max-nodes", solve_max_nodes, "node cap for construction/enumeration");
    solve->add_option("--time-budget", sopt.limits.time_budget, "seconds, exact search")
        ->capture_default_str();
    solve->add_flag("--local-search,!--no-local-search", sopt.aco.local_search,
                    "post-construction descent");
    solve->add_option("--out", sopt.out_path, "write the full result JSON here");
    solve->add_option("--dot", sopt.dot_path, "write the structure as Graphviz DOT here");

    dcsopt::CheckOptions copt;
    auto* check = app.add_subcommand("check", "evaluate a solution file against an instance");
    check->add_option("instance", copt.instance_path, "instance JSON file")->required();
    check->add_option("solution", copt.solution_path, "solution or result JSON file")->required();

    dcsopt::SweepOptions wopt;
    std::optional<int> sweep_max_nodes;
    auto* sweep =
        app.add_subcommand("sweep", "solve a template instance over loop counts and levels");
    sweep->add_option("instance", wopt.instance_path, "instance JSON file")->required();
    sweep->add_option("--loops", wopt.loop_counts, "loop counts to sweep")
        ->required()
        ->delimiter(',');
    sweep->add_option("--levels", wopt.levels, "level counts to sweep (default: instance value)")
        ->delimiter(',');
    sweep->add_option("--algo", wopt.algo, "algorithm: aco or exact")->capture_default_str();
    sweep->add_option("--seed", wopt.aco.seed, "random seed")->capture_default_str();
    sweep->add_option("--ants", wopt.aco.ants, "ants per iteration")->capture_default_str();
    sweep->add_option("--iters", wopt.aco.iterations, "iterations")->capture_default_str();
    sweep->add_option("--max-nodes", sweep_max_nodes, "node cap for construction/enumeration");
    sweep->add_option("--time-budget", wopt.limits.time_budget, "seconds per cell, exact search")
        ->capture_default_str();
    sweep->add_option("--csv", wopt.csv_path, "also write the table as CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : dcsopt::kExitInputError;
    }

    if (solve_max_nodes) {
        sopt.aco.max_nodes = *solve_max_nodes;
        sopt.limits.max_total_nodes = *solve_max_nodes;
    }
    if (sweep_max_nodes) {
        wopt.aco.max_nodes = *sweep_max_nodes;
        wopt.limits.max_total_nodes = *sweep_max_nodes;
    }

    if (solve->parsed()) return dcsopt::run_solve(sopt, std::cout, std::cerr);
    if (check->parsed()) return dcsopt::run_check(copt, std::cout, std::cerr);
    if (sweep->parsed()) return dcsopt::run_sweep(wopt, std::cout, std::cerr);
    return dcsopt::kExitInputError;
}
