#include "dcsopt/dot.hpp"

#include <algorithm>
#include <map>

namespace dcsopt {

std::string emit_dot(const ProblemInstance& inst, const Solution& sol) {
    const Topology& topo = sol.topology;
    std::vector<const TopoNode*> ordered;
    for (const TopoNode& n : topo.nodes()) ordered.push_back(&n);
    std::sort(ordered.begin(), ordered.end(),
              [](const TopoNode* a, const TopoNode* b) { return a->id < b->id; });

    std::map<NodeId, int> loops_at;
    for (const auto& [loop, leaf] : sol.placement.connection) ++loops_at[leaf];

    std::string out = "digraph structure {\n";
    for (const TopoNode* n : ordered) {
        const DeviceType& t = inst.type(n->type);
        out += "  n" + std::to_string(n->id) + " [label=\"u" + std::to_string(n->type) + "@" +
               std::to_string(n->level);
        if (auto it = loops_at.find(n->id); it != loops_at.end())
            out += "\\n" + std::to_string(it->second) + " loops";
        out += "\", shape=";
        out += t.is_processor() ? "box" : "ellipse";
        out += "];\n";
    }
    for (const TopoNode* n : ordered)
        for (NodeId c : n->children)
            out += "  n" + std::to_string(n->id) + " -> n" + std::to_string(c) + ";\n";
    out += "}\n";
    return out;
}

} // namespace dcsopt
