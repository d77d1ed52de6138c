#include "dcsopt/evaluator.hpp"

#include <algorithm>
#include <cstdio>

namespace dcsopt {

const char* constraint_name(Constraint c) {
    switch (c) {
        case Constraint::SingleRoot: return "SingleRoot";
        case Constraint::LeafNoChildren: return "LeafNoChildren";
        case Constraint::FanOut: return "FanOut";
        case Constraint::LoopConnection: return "LoopConnection";
        case Constraint::ProcessorOnly: return "ProcessorOnly";
        case Constraint::SingleProcessor: return "SingleProcessor";
        case Constraint::Memory: return "Memory";
        case Constraint::SubtreeService: return "SubtreeService";
        case Constraint::ChannelCapacity: return "ChannelCapacity";
        case Constraint::CycleTime: return "CycleTime";
        case Constraint::Reliability: return "Reliability";
        case Constraint::ProcCoordination: return "ProcCoordination";
    }
    return "?";
}

static std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

static std::vector<const TopoNode*> nodes_by_id(const Topology& topo) {
    std::vector<const TopoNode*> out;
    out.reserve(topo.size());
    for (const TopoNode& n : topo.nodes()) out.push_back(&n);
    std::sort(out.begin(), out.end(),
              [](const TopoNode* a, const TopoNode* b) { return a->id < b->id; });
    return out;
}

double total_cost(const ProblemInstance& inst, const Topology& topo) {
    double cost = 0.0;
    for (const TopoNode& n : topo.nodes()) cost += inst.type(n.type).cost;
    return cost;
}

double system_failure_probability(const ProblemInstance& inst, const Topology& topo) {
    double survive = 1.0;
    for (const TopoNode& n : topo.nodes()) survive *= 1.0 - inst.type(n.type).failure_prob;
    return 1.0 - survive;
}

// Per-loop response time; optionally reports which loop attains the maximum.
static double cycle_time_impl(const ProblemInstance& inst, const Solution& sol, LoopId* argmax) {
    const Topology& topo = sol.topology;
    std::map<NodeId, double> work;  // summed instruction counts per assigned node
    for (const auto& [loop, node] : sol.placement.assignment)
        work[node] += inst.loops[static_cast<std::size_t>(loop - 1)].instructions;

    double worst = 0.0;
    if (argmax) *argmax = 0;
    for (const ControlLoop& a : inst.loops) {
        auto az = sol.placement.assignment.find(a.id);
        auto ax = sol.placement.connection.find(a.id);

        double processing = 0.0;
        if (az != sol.placement.assignment.end()) {
            const TopoNode& v = topo.node(az->second);
            processing = work[v.id] * inst.type(v.type).instr_time;
        }

        // Repeater delays from the loop's leaf up to (excluding) the assigned
        // node. If that node is not on the path, the whole leaf-to-root chain
        // counts as a conservative bound.
        double delay = 0.0;
        if (ax != sol.placement.connection.end()) {
            for (NodeId id : root_path(topo, ax->second)) {
                if (az != sol.placement.assignment.end() && id == az->second) break;
                const DeviceType& t = inst.type(topo.node(id).type);
                if (!t.is_processor()) delay += t.delay;
            }
        }

        double total = processing + delay;
        if (total > worst) {
            worst = total;
            if (argmax) *argmax = a.id;
        }
    }
    return worst;
}

double cycle_time(const ProblemInstance& inst, const Solution& sol) {
    return cycle_time_impl(inst, sol, nullptr);
}

std::vector<Violation> check_structure(const ProblemInstance& inst, const Topology& topo) {
    std::vector<Violation> out;
    std::vector<NodeId> roots = topo.roots();
    if (roots.size() != 1)
        out.push_back({Constraint::SingleRoot, 0,
                       std::to_string(roots.size()) + " parentless nodes"});
    const int S = inst.levels;
    for (const TopoNode* n : nodes_by_id(topo)) {
        const DeviceType& t = inst.type(n->type);
        if (n->level == S && !n->children.empty())
            out.push_back({Constraint::LeafNoChildren, n->id,
                           "leaf-level node has " + std::to_string(n->children.size()) +
                               " children"});
        if (n->level != S && n->children.empty())
            out.push_back({Constraint::LeafNoChildren, n->id,
                           "level " + std::to_string(n->level) + " node has no children"});
        if (n->level != S && static_cast<int>(n->children.size()) > t.max_children)
            out.push_back({Constraint::FanOut, n->id,
                           "children " + std::to_string(n->children.size()) + "/" +
                               std::to_string(t.max_children)});
    }
    return out;
}

std::vector<Violation> check_placement(const ProblemInstance& inst, const Solution& sol) {
    std::vector<Violation> out;
    const Topology& topo = sol.topology;
    const int S = inst.levels;

    for (const ControlLoop& a : inst.loops) {
        auto ax = sol.placement.connection.find(a.id);
        if (ax == sol.placement.connection.end()) {
            out.push_back({Constraint::LoopConnection, a.id, "not connected to any leaf"});
        } else if (topo.node(ax->second).level != S) {
            out.push_back({Constraint::LoopConnection, a.id,
                           "connected to non-leaf node " + std::to_string(ax->second)});
        }

        auto az = sol.placement.assignment.find(a.id);
        if (az == sol.placement.assignment.end()) {
            out.push_back({Constraint::SingleProcessor, a.id, "not assigned to any node"});
            continue;
        }
        if (!inst.type(topo.node(az->second).type).is_processor())
            out.push_back({Constraint::ProcessorOnly, a.id,
                           "assigned to repeater node " + std::to_string(az->second)});
        if (ax != sol.placement.connection.end()) {
            bool under = false;
            for (NodeId id : root_path(topo, ax->second))
                if (id == az->second) { under = true; break; }
            if (!under)
                out.push_back({Constraint::SubtreeService, a.id,
                               "leaf " + std::to_string(ax->second) + " outside subtree of node " +
                                   std::to_string(az->second)});
        }
    }

    std::map<NodeId, double> mem_used;
    std::map<NodeId, int> chan_used;
    for (const auto& [loop, node] : sol.placement.assignment)
        mem_used[node] += inst.loops[static_cast<std::size_t>(loop - 1)].memory_req;
    for (const auto& [loop, node] : sol.placement.connection)
        chan_used[node] += inst.loops[static_cast<std::size_t>(loop - 1)].signals;

    for (const TopoNode* n : nodes_by_id(topo)) {
        const DeviceType& t = inst.type(n->type);
        auto m = mem_used.find(n->id);
        if (m != mem_used.end() && m->second > t.memory + kTol)
            out.push_back({Constraint::Memory, n->id,
                           "memory " + num(m->second) + "/" + num(t.memory)});
        auto c = chan_used.find(n->id);
        if (c != chan_used.end() && c->second > t.channels)
            out.push_back({Constraint::ChannelCapacity, n->id,
                           "channels " + std::to_string(c->second) + "/" +
                               std::to_string(t.channels)});
    }
    return out;
}

std::vector<Violation> check_processor_coordination(const ProblemInstance& inst,
                                                    const Solution& sol) {
    std::vector<Violation> out;
    const Topology& topo = sol.topology;
    const int S = inst.levels;
    for (const TopoNode* n : nodes_by_id(topo)) {
        if (n->level == S) {
            int procs = 0;
            for (NodeId id : root_path(topo, n->id))
                if (inst.type(topo.node(id).type).is_processor()) ++procs;
            if (procs != 1)
                out.push_back({Constraint::ProcCoordination, n->id,
                               std::to_string(procs) + " processors on path to root"});
        }
        if (n->parent && inst.type(n->type).is_processor() &&
            inst.type(topo.node(*n->parent).type).is_processor())
            out.push_back({Constraint::ProcCoordination, n->id,
                           "processor nested under processor " + std::to_string(*n->parent)});
    }
    return out;
}

EvaluationReport evaluate(const ProblemInstance& inst, const Solution& sol) {
    EvaluationReport rep;
    rep.cost = total_cost(inst, sol.topology);
    rep.failure_prob = system_failure_probability(inst, sol.topology);
    LoopId slowest = 0;
    rep.cycle_time = cycle_time_impl(inst, sol, &slowest);

    rep.violations = check_structure(inst, sol.topology);
    std::vector<Violation> more = check_placement(inst, sol);
    rep.violations.insert(rep.violations.end(), more.begin(), more.end());
    more = check_processor_coordination(inst, sol);
    rep.violations.insert(rep.violations.end(), more.begin(), more.end());

    if (rep.cycle_time > inst.t_max + kTol)
        rep.violations.push_back({Constraint::CycleTime, slowest,
                                  "cycle time " + num(rep.cycle_time) + "/" + num(inst.t_max)});
    if (rep.failure_prob > inst.p_max + kTol)
        rep.violations.push_back({Constraint::Reliability, 0,
                                  "failure probability " + num(rep.failure_prob) + "/" +
                                      num(inst.p_max)});
    rep.feasible = rep.violations.empty();
    return rep;
}

} // namespace dcsopt
