#pragma once

#include "dcsopt/model.hpp"

namespace dcsopt {

/// Absolute tolerance used for every real-valued comparison at constraint
/// boundaries (a cycle time exactly at t_max is feasible).
inline constexpr double kTol = 1e-9;

enum class Constraint {
    SingleRoot,
    LeafNoChildren,
    FanOut,
    LoopConnection,
    ProcessorOnly,
    SingleProcessor,
    Memory,
    SubtreeService,
    ChannelCapacity,
    CycleTime,
    Reliability,
    ProcCoordination,
};

const char* constraint_name(Constraint c);

struct Violation {
    Constraint constraint;
    int subject = 0;        // node id or loop id; 0 = whole system
    std::string detail;     // human-readable slack, e.g. "memory 513/512"
};

struct EvaluationReport {
    double cost = 0.0;
    double cycle_time = 0.0;
    double failure_prob = 0.0;
    std::vector<Violation> violations;
    bool feasible = false;
};

double total_cost(const ProblemInstance& inst, const Topology& topo);

/// 1 - prod(1 - P_v) over every device in the structure.
double system_failure_probability(const ProblemInstance& inst, const Topology& topo);

/// Worst per-loop response time: the assigned node's instruction load times
/// its per-instruction time, plus the repeater delays between the loop's leaf
/// and that node.
double cycle_time(const ProblemInstance& inst, const Solution& sol);

std::vector<Violation> check_structure(const ProblemInstance& inst, const Topology& topo);
std::vector<Violation> check_placement(const ProblemInstance& inst, const Solution& sol);
std::vector<Violation> check_processor_coordination(const ProblemInstance& inst, const Solution& sol);

/// Runs every check plus the cycle-time and reliability bounds. Cost, cycle
/// time and failure probability are always computed, feasible or not.
EvaluationReport evaluate(const ProblemInstance& inst, const Solution& sol);

std::string report_to_json(const EvaluationReport& report);

} // namespace dcsopt
