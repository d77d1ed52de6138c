#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dcsopt {

struct Error : std::runtime_error {
    enum class Kind { Parse, Validation, Lookup };
    Kind kind;
    Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

[[noreturn]] void throw_parse(const std::string& msg);
[[noreturn]] void throw_validation(const std::string& msg);
[[noreturn]] void throw_lookup(const std::string& msg);

using NodeId = int;
using LoopId = int;

enum class Mode { Processor, Repeater };

/// One catalog entry: a device model the structure can be built from.
struct DeviceType {
    int id = 0;                 // 1-based catalog index
    double cost = 0.0;
    int channels = 0;           // field-signal channels on the device
    double memory = 0.0;
    double failure_prob = 0.0;
    double instr_time = 0.0;    // seconds per program instruction (processors)
    Mode mode = Mode::Repeater;
    int max_children = 0;       // fan-out limit
    double delay = 0.0;         // store-and-forward latency (repeaters)

    bool is_processor() const { return mode == Mode::Processor; }
    bool operator==(const DeviceType&) const = default;
};

/// A control loop: a bundle of field signals plus its processing program.
struct ControlLoop {
    LoopId id = 0;              // 1-based
    int signals = 1;
    double memory_req = 0.0;
    int instructions = 0;

    bool operator==(const ControlLoop&) const = default;
};

struct ProblemInstance {
    std::vector<DeviceType> catalog;
    std::vector<ControlLoop> loops;
    int levels = 1;             // number of hierarchy levels S
    double t_max = 1.0;         // cycle-time bound, seconds
    double p_max = 1.0;         // system failure probability bound

    const DeviceType& type(int type_id) const;

    /// Checks all type/loop/instance invariants; throws Error(Validation) on
    /// hard violations, appends advisory notes (unsatisfiable catalogs) to
    /// `warnings` when given.
    void validate(std::vector<std::string>* warnings = nullptr) const;

    bool operator==(const ProblemInstance&) const = default;
};

struct TopoNode {
    NodeId id = 0;
    int type = 0;               // catalog id
    std::optional<NodeId> parent;
    std::vector<NodeId> children;
    int level = 1;              // 1 = root level, S = leaf level
};

/// Rooted tree of typed devices. Kept permissive on purpose: structural
/// defects (forests, childless mid-level nodes) are representable and get
/// reported by the evaluator as violations, not construction errors.
class Topology {
public:
    NodeId add_root(int type_id);
    NodeId add_child(NodeId parent, int type_id);
    /// Removes a node that has no children. Its id is retired, not reused.
    void remove_childless(NodeId id);
    void set_type(NodeId id, int type_id);

    bool contains(NodeId id) const { return index_.count(id) != 0; }
    const TopoNode& node(NodeId id) const;
    const std::vector<TopoNode>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }

    std::vector<NodeId> roots() const;   // all parentless nodes, id order
    NodeId root() const;                 // first parentless node

    /// Rebuilds a topology from raw (id, type, parent) records: derives
    /// children and levels, rejects duplicate ids, dangling parents and
    /// cycles.
    static Topology from_records(const std::vector<std::tuple<NodeId, int, std::optional<NodeId>>>& records);

private:
    TopoNode& mutable_node(NodeId id);
    std::vector<TopoNode> nodes_;
    std::unordered_map<NodeId, int> index_;
    NodeId next_id_ = 1;
};

/// All descendants of v including v itself, ascending by id.
std::vector<NodeId> subtree(const Topology& topo, NodeId v);

/// [v, parent(v), ..., root], both endpoints included.
std::vector<NodeId> root_path(const Topology& topo, NodeId v);

/// x and z as maps: connection[a] = leaf carrying loop a's signals,
/// assignment[a] = node executing its program. Entries may be missing for
/// partially constructed candidates; the evaluator reports that as a
/// violation.
struct Placement {
    std::map<LoopId, NodeId> connection;
    std::map<LoopId, NodeId> assignment;
};

struct Solution {
    Topology topology;
    Placement placement;
};

// --- serialization (JSON text) ---

ProblemInstance load_instance(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::string serialize_instance(const ProblemInstance& inst);

/// Parses a solution file and validates it against the instance: node ids
/// unique, parents and catalog types resolvable, connection/assignment total
/// over the instance's loops.
Solution solution_from_json(const std::string& text, const ProblemInstance& inst);
std::string solution_to_json(const Solution& sol);

} // namespace dcsopt
