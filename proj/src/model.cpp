#include "dcsopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace dcsopt {

void throw_parse(const std::string& msg) { throw Error(Error::Kind::Parse, msg); }
void throw_validation(const std::string& msg) { throw Error(Error::Kind::Validation, msg); }
void throw_lookup(const std::string& msg) { throw Error(Error::Kind::Lookup, msg); }

const DeviceType& ProblemInstance::type(int type_id) const {
    if (type_id < 1 || type_id > static_cast<int>(catalog.size()))
        throw_lookup("unknown device type " + std::to_string(type_id));
    return catalog[static_cast<std::size_t>(type_id - 1)];
}

static void require(bool ok, const std::string& where, const std::string& what) {
    if (!ok) throw_validation(where + ": " + what);
}

static bool finite_number(double x) { return std::isfinite(x); }

void ProblemInstance::validate(std::vector<std::string>* warnings) const {
    require(!catalog.empty(), "device_types", "catalog must not be empty");
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const DeviceType& t = catalog[i];
        const std::string where = "device_types[" + std::to_string(i) + "]";
        require(t.id == static_cast<int>(i) + 1, where, "id must equal position + 1");
        require(finite_number(t.cost) && t.cost >= 0.0, where, "cost must be a nonnegative number");
        require(t.channels >= 0, where, "channels must be nonnegative");
        require(finite_number(t.memory) && t.memory >= 0.0, where, "memory must be nonnegative");
        require(finite_number(t.failure_prob) && t.failure_prob >= 0.0 && t.failure_prob <= 1.0,
                where, "failure_prob must lie in [0, 1]");
        require(finite_number(t.instr_time) && t.instr_time >= 0.0, where,
                "instr_time must be nonnegative");
        require(t.max_children >= 1, where, "max_children must be at least 1");
        require(finite_number(t.delay) && t.delay >= 0.0, where, "delay must be nonnegative");
    }
    for (std::size_t i = 0; i < loops.size(); ++i) {
        const ControlLoop& a = loops[i];
        const std::string where = "loops[" + std::to_string(i) + "]";
        require(a.id == static_cast<int>(i) + 1, where, "id must equal position + 1");
        require(a.signals >= 1, where, "signals must be positive");
        require(finite_number(a.memory_req) && a.memory_req >= 0.0, where,
                "memory_req must be nonnegative");
        require(a.instructions >= 0, where, "instructions must be nonnegative");
    }
    require(levels >= 1, "levels", "must be at least 1");
    require(finite_number(t_max) && t_max > 0.0, "t_max", "must be positive");
    require(finite_number(p_max) && p_max >= 0.0 && p_max <= 1.0, "p_max", "must lie in [0, 1]");

    if (warnings) {
        bool has_proc = std::any_of(catalog.begin(), catalog.end(),
                                    [](const DeviceType& t) { return t.is_processor(); });
        bool has_channels = std::any_of(catalog.begin(), catalog.end(),
                                        [](const DeviceType& t) { return t.channels > 0; });
        if (!has_proc)
            warnings->push_back("catalog has no processor type; no feasible structure exists");
        if (levels >= 2 && !has_channels)
            warnings->push_back("catalog has no type with channels; loops cannot be connected");
    }
}

NodeId Topology::add_root(int type_id) {
    TopoNode n;
    n.id = next_id_++;
    n.type = type_id;
    n.level = 1;
    index_[n.id] = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
}

NodeId Topology::add_child(NodeId parent, int type_id) {
    TopoNode& p = mutable_node(parent);
    TopoNode n;
    n.id = next_id_++;
    n.type = type_id;
    n.parent = parent;
    n.level = p.level + 1;
    p.children.push_back(n.id);
    index_[n.id] = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
}

void Topology::remove_childless(NodeId id) {
    const TopoNode& n = node(id);
    if (!n.children.empty())
        throw_validation("cannot remove node " + std::to_string(id) + ": it has children");
    if (n.parent) {
        TopoNode& p = mutable_node(*n.parent);
        p.children.erase(std::remove(p.children.begin(), p.children.end(), id), p.children.end());
    }
    int pos = index_.at(id);
    nodes_.erase(nodes_.begin() + pos);
    index_.erase(id);
    for (auto& [nid, idx] : index_)
        if (idx > pos) --idx;
}

void Topology::set_type(NodeId id, int type_id) { mutable_node(id).type = type_id; }

const TopoNode& Topology::node(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw_lookup("unknown node " + std::to_string(id));
    return nodes_[static_cast<std::size_t>(it->second)];
}

TopoNode& Topology::mutable_node(NodeId id) {
    auto it = index_.find(id);
    if (it == index_.end()) throw_lookup("unknown node " + std::to_string(id));
    return nodes_[static_cast<std::size_t>(it->second)];
}

std::vector<NodeId> Topology::roots() const {
    std::vector<NodeId> out;
    for (const TopoNode& n : nodes_)
        if (!n.parent) out.push_back(n.id);
    std::sort(out.begin(), out.end());
    return out;
}

NodeId Topology::root() const {
    std::vector<NodeId> r = roots();
    if (r.empty()) throw_lookup("topology has no root");
    return r.front();
}

Topology Topology::from_records(
    const std::vector<std::tuple<NodeId, int, std::optional<NodeId>>>& records) {
    Topology topo;
    for (const auto& [id, type, parent] : records) {
        if (topo.index_.count(id))
            throw_validation("duplicate node id " + std::to_string(id));
        TopoNode n;
        n.id = id;
        n.type = type;
        n.parent = parent;
        topo.index_[id] = static_cast<int>(topo.nodes_.size());
        topo.nodes_.push_back(std::move(n));
        topo.next_id_ = std::max(topo.next_id_, id + 1);
    }
    for (TopoNode& n : topo.nodes_) {
        if (!n.parent) continue;
        auto it = topo.index_.find(*n.parent);
        if (it == topo.index_.end())
            throw_validation("node " + std::to_string(n.id) + " references unknown parent " +
                             std::to_string(*n.parent));
        topo.nodes_[static_cast<std::size_t>(it->second)].children.push_back(n.id);
    }
    for (TopoNode& n : topo.nodes_)
        std::sort(n.children.begin(), n.children.end());
    // Derive levels by walking parents; more steps than nodes means a cycle.
    for (TopoNode& n : topo.nodes_) {
        int depth = 1;
        const TopoNode* cur = &n;
        while (cur->parent) {
            cur = &topo.node(*cur->parent);
            if (++depth > static_cast<int>(topo.nodes_.size()))
                throw_validation("parent links contain a cycle at node " + std::to_string(n.id));
        }
        n.level = depth;
    }
    return topo;
}

std::vector<NodeId> subtree(const Topology& topo, NodeId v) {
    std::vector<NodeId> out;
    std::deque<NodeId> work{v};
    while (!work.empty()) {
        NodeId cur = work.front();
        work.pop_front();
        out.push_back(cur);
        for (NodeId c : topo.node(cur).children) work.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<NodeId> root_path(const Topology& topo, NodeId v) {
    std::vector<NodeId> out;
    const TopoNode* cur = &topo.node(v);
    out.push_back(cur->id);
    while (cur->parent) {
        cur = &topo.node(*cur->parent);
        out.push_back(cur->id);
        if (out.size() > topo.size())
            throw_validation("parent links contain a cycle at node " + std::to_string(v));
    }
    return out;
}

} // namespace dcsopt
