#pragma once

#include <cstdint>
#include <random>

#include "dcsopt/evaluator.hpp"
#include "dcsopt/model.hpp"

namespace dcsopt {

struct AcoParams {
    int ants = 20;
    int iterations = 200;
    double alpha = 1.0;         // trail exponent
    double beta = 2.0;          // heuristic (cost) exponent
    double rho = 0.1;           // evaporation rate
    std::optional<double> q;    // deposit scale; unset = cost of first feasible
    std::uint64_t seed = 1;
    double tau0 = 1.0;          // initial trail
    int max_nodes = 512;        // construction safety cap
    bool local_search = true;
};

/// Trail key: which device type (or the stop marker) to put at `level` under
/// a parent of type `parent_type`. Sentinel 0 stands for "root slot" in
/// parent_type and for "stop expanding" in choice.
struct PheromoneKey {
    int level = 0;
    int parent_type = 0;
    int choice = 0;
    auto operator<=>(const PheromoneKey&) const = default;
};

inline constexpr int kRootParent = 0;
inline constexpr int kStopExpansion = 0;

class PheromoneTable {
public:
    explicit PheromoneTable(double tau0 = 1.0, double tau_min = 1e-3)
        : tau0_(tau0), tau_min_(tau_min) {}

    double trail(const PheromoneKey& key) const;
    void add(const PheromoneKey& key, double delta);
    void evaporate(double rho);      // multiplies stored trails by 1-rho, floored at tau_min
    void reset() { trails_.clear(); }

    double tau0() const { return tau0_; }
    std::size_t stored() const { return trails_.size(); }

private:
    double tau0_;
    double tau_min_;
    std::map<PheromoneKey, double> trails_;
};

struct RunResult {
    std::optional<Solution> best;
    std::optional<EvaluationReport> best_report;
    /// Global-best cost after each iteration; empty optionals until the first
    /// feasible solution appears.
    std::vector<std::optional<double>> history;
    long long evaluations = 0;
};

/// Samples one candidate structure top-down from the trails, then connects
/// loops first-fit-decreasing and assigns each to the processor over its
/// leaf. May return structurally incomplete candidates; they evaluate
/// infeasible.
Solution construct_ant(const ProblemInstance& inst, const PheromoneTable& pher,
                       std::mt19937_64& rng, const AcoParams& params);

/// Adds q / report.cost to every decision key the solution's topology uses.
void deposit(const ProblemInstance& inst, PheromoneTable& pher, const Solution& sol,
             const EvaluationReport& report, double q);

void evaporate(PheromoneTable& pher, double rho);

/// First-improvement descent on a feasible solution: drop unused repeater
/// leaves, downgrade device types within the same mode. Never returns a worse
/// or infeasible solution.
Solution local_improve(const ProblemInstance& inst, const Solution& sol);

RunResult optimize(const ProblemInstance& inst, const AcoParams& params);

std::string run_result_to_json(const RunResult& result, const AcoParams& params);

} // namespace dcsopt
