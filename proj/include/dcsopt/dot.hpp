#pragma once

#include <string>

#include "dcsopt/model.hpp"

namespace dcsopt {

/// Graphviz rendering of a solution: one node per device labelled
/// "u<type>@<level>" (box = processor, ellipse = repeater), one edge per
/// parent-child link, loop counts annotated on leaves. Output is byte-stable
/// for a given solution.
std::string emit_dot(const ProblemInstance& inst, const Solution& sol);

} // namespace dcsopt
