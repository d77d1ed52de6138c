#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dcsopt/aco.hpp"
#include "dcsopt/exact.hpp"

namespace dcsopt {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInfeasible = 2;

struct SolveOptions {
    std::string instance_path;
    std::string algo = "aco";            // "aco" | "exact"
    std::optional<int> loops;            // override loop_count (template instances)
    std::optional<int> levels;           // override levels
    AcoParams aco;
    SearchLimits limits;
    std::optional<std::string> out_path; // report JSON
    std::optional<std::string> dot_path;
};

struct CheckOptions {
    std::string instance_path;
    std::string solution_path;
};

struct SweepOptions {
    std::string instance_path;
    std::vector<int> loop_counts;
    std::vector<int> levels;
    std::string algo = "exact";
    AcoParams aco;
    SearchLimits limits;
    std::optional<std::string> csv_path;
};

int run_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err);
int run_check(const CheckOptions& opt, std::ostream& out, std::ostream& err);
int run_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);

} // namespace dcsopt
