#pragma once

#include "json.hpp"

#include "dcsopt/evaluator.hpp"
#include "dcsopt/model.hpp"

namespace dcsopt::detail {

nlohmann::ordered_json solution_json(const Solution& sol);
nlohmann::ordered_json report_json(const EvaluationReport& report);
nlohmann::ordered_json instance_json(const ProblemInstance& inst);

} // namespace dcsopt::detail
