#pragma once

#include <functional>

#include "dcsopt/evaluator.hpp"
#include "dcsopt/model.hpp"

namespace dcsopt {

struct SearchLimits {
    int max_total_nodes = 0;        // 0 = derive from the instance
    double time_budget = 60.0;      // seconds
};

enum class ExactStatus { Optimal, InfeasibleProven, BudgetExhausted };

const char* exact_status_name(ExactStatus s);

struct ExactResult {
    ExactStatus status = ExactStatus::BudgetExhausted;
    std::optional<Solution> best;
    std::optional<double> cost;
    long long nodes_explored = 0;   // complete structures placement-checked
};

/// Test hooks: every pruning rule can be switched off without changing the
/// returned cost, and the enumeration stream can be observed.
struct ExactOptions {
    bool prune_cost = true;
    bool prune_path = true;         // one-processor-per-path context filter
    bool prune_capacity = true;
    std::function<void(const Topology&)> on_topology;
};

/// Aggregate view of a partially built structure, enough to decide whether
/// any completion within the remaining node budget could still serve all
/// loops.
struct CapacitySnapshot {
    long long placed_leaf_channels = 0;
    std::vector<std::pair<int, int>> processors;  // (level, catalog type id)
    int remaining_budget = 0;
    bool can_add_processor = true;
};

/// Relaxed completion test: total reachable leaf channels must cover the
/// signal demand and summed per-processor loop capacity must cover the loop
/// count. True never rules out a feasible completion.
bool capacity_bound(const ProblemInstance& inst, const CapacitySnapshot& partial);

/// Optimistic loop count a processor of this type could serve at this level:
/// only memory, the best-case relay delay and (for leaf processors) its own
/// channels are held against it.
long long processor_capacity(const ProblemInstance& inst, const DeviceType& type, int level);

/// Canonical enumeration of every structure within the node cap, with
/// branch-and-bound pruning; proves optimality or infeasibility within the
/// cap, or gives up when the time budget runs out.
ExactResult solve_exact(const ProblemInstance& inst, const SearchLimits& limits = {},
                        const ExactOptions& options = {});

std::string exact_result_to_json(const ProblemInstance& inst, const ExactResult& result);

} // namespace dcsopt
