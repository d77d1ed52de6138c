#pragma once

#include <cstdint>
#include <random>

#include "builders.hpp"

namespace testutil {

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    int i(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    double d(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
    bool chance(double p) { return d(0.0, 1.0) < p; }
};

/// Small random instance: 2-3 device types with at least one processor and
/// one loop-capable repeater, up to `max_loops` loops, 2 or 3 levels. Bounds
/// are tuned so the optimum (when one exists) stays within a handful of
/// nodes.
inline ProblemInstance random_instance(std::uint64_t seed, int max_loops = 8) {
    Rng r(seed);
    ProblemInstance inst;

    const int proc_channels = r.chance(0.3) ? r.i(2, 6) : 0;
    inst.catalog.push_back(device(1, 10 * r.i(20, 150), proc_channels, r.i(8, 64),
                                  r.d(0.002, 0.02), r.d(0.002, 0.01), Mode::Processor, r.i(2, 4),
                                  0.0));
    inst.catalog.push_back(device(2, 10 * r.i(2, 15), r.i(4, 8), 0, r.d(0.001, 0.01), 0.0,
                                  Mode::Repeater, r.i(2, 4), r.d(0.02, 0.15)));
    if (r.chance(0.35))
        inst.catalog.push_back(device(3, 10 * r.i(2, 15), r.i(2, 8), 0, r.d(0.001, 0.01), 0.0,
                                      Mode::Repeater, r.i(2, 4), r.d(0.02, 0.15)));

    const int loops = r.i(1, max_loops);
    if (r.chance(0.6)) {
        const int n = r.i(1, 2);
        const double rr = r.i(1, 3);
        const int w = r.i(2, 10);
        for (int a = 1; a <= loops; ++a) inst.loops.push_back(loop(a, n, rr, w));
    } else {
        for (int a = 1; a <= loops; ++a)
            inst.loops.push_back(loop(a, r.i(1, 2), r.i(1, 3), r.i(2, 10)));
    }

    inst.levels = r.i(2, 3);
    inst.t_max = r.d(0.2, 1.5);
    inst.p_max = r.d(0.05, 0.4);
    return inst;
}

/// Loose random topology: mostly tree-shaped growth over the catalog, with
/// occasional deliberate defects (overfull fan-out, stunted interior nodes,
/// second roots) so the checks have something to find.
inline Topology random_topology(const ProblemInstance& inst, Rng& r) {
    Topology topo;
    const int types = static_cast<int>(inst.catalog.size());
    topo.add_root(r.i(1, types));
    if (r.chance(0.05)) topo.add_root(r.i(1, types));

    const int grow = r.i(0, 9);
    for (int g = 0; g < grow; ++g) {
        std::vector<NodeId> open;
        for (const TopoNode& n : topo.nodes()) {
            if (n.level >= inst.levels) continue;
            const int cap = inst.type(n.type).max_children;
            const bool overfill = r.chance(0.04);
            if (static_cast<int>(n.children.size()) < cap + (overfill ? 1 : 0))
                open.push_back(n.id);
        }
        if (open.empty()) break;
        NodeId parent = open[static_cast<std::size_t>(r.i(0, static_cast<int>(open.size()) - 1))];
        topo.add_child(parent, r.i(1, types));
    }
    return topo;
}

/// Random placement over a random topology: biased toward sensible choices
/// (leaves for connections, on-path processors for assignments) with enough
/// noise to exercise every violation path, including missing entries.
inline Solution random_solution(const ProblemInstance& inst, Rng& r) {
    Solution sol;
    sol.topology = random_topology(inst, r);
    std::vector<NodeId> all;
    std::vector<NodeId> leaves;
    for (const TopoNode& n : sol.topology.nodes()) {
        all.push_back(n.id);
        if (n.level == inst.levels) leaves.push_back(n.id);
    }
    auto pick = [&](const std::vector<NodeId>& v) {
        return v[static_cast<std::size_t>(r.i(0, static_cast<int>(v.size()) - 1))];
    };
    for (const ControlLoop& a : inst.loops) {
        if (r.chance(0.92)) {
            NodeId leaf = (!leaves.empty() && r.chance(0.9)) ? pick(leaves) : pick(all);
            sol.placement.connection[a.id] = leaf;
            if (r.chance(0.95)) {
                NodeId host = 0;
                for (NodeId id : root_path(sol.topology, leaf))
                    if (inst.type(sol.topology.node(id).type).is_processor()) host = id;
                if (host == 0 || r.chance(0.15)) host = pick(all);
                sol.placement.assignment[a.id] = host;
            }
        } else if (r.chance(0.5)) {
            sol.placement.assignment[a.id] = pick(all);
        }
    }
    return sol;
}

} // namespace testutil
