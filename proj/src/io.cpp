#include <algorithm>
#include <charconv>

#include "json_util.hpp"

#include "dcsopt/aco.hpp"
#include "dcsopt/exact.hpp"

namespace dcsopt {

using nlohmann::json;
using nlohmann::ordered_json;

// --- parse helpers -----------------------------------------------------------

static json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw_parse(std::string("invalid JSON: ") + e.what());
    }
}

static const json& member(const json& obj, const std::string& where, const char* key) {
    if (!obj.is_object()) throw_parse(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw_parse(where + "." + key + ": missing");
    return *it;
}

static double num_field(const json& obj, const std::string& where, const char* key) {
    const json& v = member(obj, where, key);
    if (!v.is_number()) throw_parse(where + "." + key + ": expected a number");
    return v.get<double>();
}

static int int_field(const json& obj, const std::string& where, const char* key) {
    const json& v = member(obj, where, key);
    if (!v.is_number_integer()) throw_parse(where + "." + key + ": expected an integer");
    return v.get<int>();
}

// --- instance ----------------------------------------------------------------

ProblemInstance load_instance(const std::string& text, std::vector<std::string>* warnings) {
    json doc = parse_text(text);
    if (!doc.is_object()) throw_parse("instance: expected a JSON object");

    ProblemInstance inst;
    const json& types = member(doc, "instance", "device_types");
    if (!types.is_array()) throw_parse("device_types: expected an array");
    for (std::size_t i = 0; i < types.size(); ++i) {
        const std::string where = "device_types[" + std::to_string(i) + "]";
        const json& t = types[i];
        DeviceType d;
        d.id = static_cast<int>(i) + 1;
        d.cost = num_field(t, where, "cost");
        d.channels = int_field(t, where, "channels");
        d.memory = num_field(t, where, "memory");
        d.failure_prob = num_field(t, where, "failure_prob");
        d.instr_time = num_field(t, where, "instr_time");
        const json& mode = member(t, where, "mode");
        if (mode == "processor")
            d.mode = Mode::Processor;
        else if (mode == "repeater")
            d.mode = Mode::Repeater;
        else
            throw_parse(where + ".mode: expected \"processor\" or \"repeater\"");
        d.max_children = int_field(t, where, "max_children");
        d.delay = num_field(t, where, "delay");
        inst.catalog.push_back(d);
    }

    bool has_list = doc.contains("loops");
    bool has_template = doc.contains("loop_template") || doc.contains("loop_count");
    if (has_list && has_template)
        throw_parse("instance: give either loops or loop_template/loop_count, not both");
    if (has_list) {
        const json& loops = doc["loops"];
        if (!loops.is_array()) throw_parse("loops: expected an array");
        for (std::size_t i = 0; i < loops.size(); ++i) {
            const std::string where = "loops[" + std::to_string(i) + "]";
            ControlLoop a;
            a.id = static_cast<int>(i) + 1;
            a.signals = int_field(loops[i], where, "signals");
            a.memory_req = num_field(loops[i], where, "memory_req");
            a.instructions = int_field(loops[i], where, "instructions");
            inst.loops.push_back(a);
        }
    } else if (has_template) {
        const json& tpl = member(doc, "instance", "loop_template");
        int count = int_field(doc, "instance", "loop_count");
        if (count < 0) throw_parse("loop_count: must be nonnegative");
        ControlLoop proto;
        proto.signals = int_field(tpl, "loop_template", "signals");
        proto.memory_req = num_field(tpl, "loop_template", "memory_req");
        proto.instructions = int_field(tpl, "loop_template", "instructions");
        for (int i = 0; i < count; ++i) {
            ControlLoop a = proto;
            a.id = i + 1;
            inst.loops.push_back(a);
        }
    } else {
        throw_parse("instance: needs loops or loop_template + loop_count");
    }

    inst.levels = int_field(doc, "instance", "levels");
    inst.t_max = num_field(doc, "instance", "t_max");
    inst.p_max = num_field(doc, "instance", "p_max");
    inst.validate(warnings);
    return inst;
}

nlohmann::ordered_json detail::instance_json(const ProblemInstance& inst) {
    ordered_json doc;
    doc["device_types"] = ordered_json::array();
    for (const DeviceType& t : inst.catalog) {
        ordered_json d;
        d["cost"] = t.cost;
        d["channels"] = t.channels;
        d["memory"] = t.memory;
        d["failure_prob"] = t.failure_prob;
        d["instr_time"] = t.instr_time;
        d["mode"] = t.is_processor() ? "processor" : "repeater";
        d["max_children"] = t.max_children;
        d["delay"] = t.delay;
        doc["device_types"].push_back(std::move(d));
    }
    doc["loops"] = ordered_json::array();
    for (const ControlLoop& a : inst.loops) {
        ordered_json l;
        l["signals"] = a.signals;
        l["memory_req"] = a.memory_req;
        l["instructions"] = a.instructions;
        doc["loops"].push_back(std::move(l));
    }
    doc["levels"] = inst.levels;
    doc["t_max"] = inst.t_max;
    doc["p_max"] = inst.p_max;
    return doc;
}

std::string serialize_instance(const ProblemInstance& inst) {
    return detail::instance_json(inst).dump(2) + "\n";
}

// --- solution ----------------------------------------------------------------

static std::map<LoopId, NodeId> placement_map(const json& obj, const std::string& where,
                                              const ProblemInstance& inst, const Topology& topo) {
    if (!obj.is_object()) throw_parse(where + ": expected an object");
    std::map<LoopId, NodeId> out;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& key = it.key();
        int loop_id = 0;
        auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), loop_id);
        if (ec != std::errc() || p != key.data() + key.size())
            throw_parse(where + ": key \"" + key + "\" is not a loop id");
        if (loop_id < 1 || loop_id > static_cast<int>(inst.loops.size()))
            throw_validation(where + ": unknown loop " + key);
        if (!it.value().is_number_integer())
            throw_parse(where + "." + key + ": expected a node id");
        NodeId node_id = it.value().get<int>();
        if (!topo.contains(node_id))
            throw_validation(where + "." + key + ": unknown node " + std::to_string(node_id));
        out[loop_id] = node_id;
    }
    for (const ControlLoop& a : inst.loops)
        if (!out.count(a.id))
            throw_validation(where + ": not total, loop " + std::to_string(a.id) + " missing");
    return out;
}

Solution solution_from_json(const std::string& text, const ProblemInstance& inst) {
    json doc = parse_text(text);
    if (!doc.is_object()) throw_parse("solution: expected a JSON object");
    // A solve report embeds the solution under "solution"; accept both forms.
    const json& body = doc.contains("nodes") ? doc : member(doc, "solution", "solution");

    const json& nodes = member(body, "solution", "nodes");
    if (!nodes.is_array()) throw_parse("nodes: expected an array");
    std::vector<std::tuple<NodeId, int, std::optional<NodeId>>> records;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string where = "nodes[" + std::to_string(i) + "]";
        NodeId id = int_field(nodes[i], where, "id");
        int type = int_field(nodes[i], where, "type");
        if (type < 1 || type > static_cast<int>(inst.catalog.size()))
            throw_validation(where + ": unknown device type " + std::to_string(type));
        std::optional<NodeId> parent;
        const json& p = member(nodes[i], where, "parent");
        if (!p.is_null()) {
            if (!p.is_number_integer()) throw_parse(where + ".parent: expected a node id or null");
            parent = p.get<int>();
        }
        records.emplace_back(id, type, parent);
    }

    Solution sol;
    sol.topology = Topology::from_records(records);
    sol.placement.connection = placement_map(member(body, "solution", "connection"), "connection",
                                             inst, sol.topology);
    sol.placement.assignment = placement_map(member(body, "solution", "assignment"), "assignment",
                                             inst, sol.topology);
    return sol;
}

nlohmann::ordered_json detail::solution_json(const Solution& sol) {
    ordered_json doc;
    doc["nodes"] = ordered_json::array();
    std::vector<const TopoNode*> ordered;
    for (const TopoNode& n : sol.topology.nodes()) ordered.push_back(&n);
    std::sort(ordered.begin(), ordered.end(),
              [](const TopoNode* a, const TopoNode* b) { return a->id < b->id; });
    for (const TopoNode* n : ordered) {
        ordered_json d;
        d["id"] = n->id;
        d["type"] = n->type;
        if (n->parent)
            d["parent"] = *n->parent;
        else
            d["parent"] = nullptr;
        doc["nodes"].push_back(std::move(d));
    }
    ordered_json conn = ordered_json::object();
    for (const auto& [loop, node] : sol.placement.connection) conn[std::to_string(loop)] = node;
    ordered_json assign = ordered_json::object();
    for (const auto& [loop, node] : sol.placement.assignment) assign[std::to_string(loop)] = node;
    doc["connection"] = std::move(conn);
    doc["assignment"] = std::move(assign);
    return doc;
}

std::string solution_to_json(const Solution& sol) {
    return detail::solution_json(sol).dump(2) + "\n";
}

// --- reports -----------------------------------------------------------------

nlohmann::ordered_json detail::report_json(const EvaluationReport& report) {
    ordered_json doc;
    doc["cost"] = report.cost;
    doc["cycle_time"] = report.cycle_time;
    doc["failure_prob"] = report.failure_prob;
    doc["feasible"] = report.feasible;
    doc["violations"] = ordered_json::array();
    for (const Violation& v : report.violations) {
        ordered_json d;
        d["constraint"] = constraint_name(v.constraint);
        d["subject"] = v.subject;
        d["detail"] = v.detail;
        doc["violations"].push_back(std::move(d));
    }
    return doc;
}

std::string report_to_json(const EvaluationReport& report) {
    return detail::report_json(report).dump(2) + "\n";
}

std::string run_result_to_json(const RunResult& result, const AcoParams& params) {
    ordered_json doc;
    doc["algo"] = "aco";
    doc["seed"] = params.seed;
    doc["feasible"] = result.best.has_value();
    if (result.best_report) {
        doc["cost"] = result.best_report->cost;
        doc["cycle_time"] = result.best_report->cycle_time;
        doc["failure_prob"] = result.best_report->failure_prob;
    } else {
        doc["cost"] = nullptr;
        doc["cycle_time"] = nullptr;
        doc["failure_prob"] = nullptr;
    }
    doc["solution"] = result.best ? detail::solution_json(*result.best) : ordered_json(nullptr);
    doc["history"] = ordered_json::array();
    for (const auto& h : result.history)
        doc["history"].push_back(h ? ordered_json(*h) : ordered_json(nullptr));
    doc["evaluations"] = result.evaluations;
    return doc.dump(2) + "\n";
}

std::string exact_result_to_json(const ProblemInstance& inst, const ExactResult& result) {
    ordered_json doc;
    doc["algo"] = "exact";
    doc["status"] = exact_status_name(result.status);
    doc["feasible"] = result.best.has_value();
    if (result.best) {
        EvaluationReport rep = evaluate(inst, *result.best);
        doc["cost"] = rep.cost;
        doc["cycle_time"] = rep.cycle_time;
        doc["failure_prob"] = rep.failure_prob;
        doc["solution"] = detail::solution_json(*result.best);
    } else {
        doc["cost"] = nullptr;
        doc["cycle_time"] = nullptr;
        doc["failure_prob"] = nullptr;
        doc["solution"] = nullptr;
    }
    doc["nodes_explored"] = result.nodes_explored;
    return doc.dump(2) + "\n";
}

} // namespace dcsopt
