#pragma once

#include <chrono>
#include <optional>

#include "dcsopt/model.hpp"

namespace dcsopt::detail {

/// One leaf of a structure together with the unique processor that serves it
/// (0 when the path holds zero or several processors) and the summed repeater
/// delay between the two.
struct LeafSlot {
    NodeId leaf = 0;
    NodeId proc = 0;
    double delay = 0.0;
    int channels = 0;
};

struct ServiceMap {
    std::vector<LeafSlot> leaves;   // ascending leaf id
    bool one_proc_per_leaf = true;  // every leaf served by exactly one processor
};

ServiceMap build_service_map(const ProblemInstance& inst, const Topology& topo);

bool all_loops_identical(const ProblemInstance& inst);

/// Complete placement feasibility search for a finished structure. Exhaustive
/// (closed-form for identical loops, backtracking for small loop counts,
/// first-fit-decreasing plus swap repair beyond that). Sets *truncated when
/// the search gave up before proving anything.
std::optional<Placement> find_placement(
    const ProblemInstance& inst, const Topology& topo, const ServiceMap& service, bool* truncated,
    std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

/// Cheap variant for solver inner loops: closed form for identical loops,
/// first-fit-decreasing otherwise. Never backtracks, so a miss here is not a
/// proof of infeasibility.
std::optional<Placement> place_fast(const ProblemInstance& inst, const Topology& topo,
                                    const ServiceMap& service);

} // namespace dcsopt::detail
