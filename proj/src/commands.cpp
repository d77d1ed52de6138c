#include "dcsopt/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dcsopt/dot.hpp"
#include "json_util.hpp"

namespace dcsopt {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_parse("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_parse("cannot write file: " + path);
    out << text;
    if (!out) throw_parse("cannot write file: " + path);
}

ProblemInstance load_with_overrides(const std::string& path, std::optional<int> loops,
                                    std::optional<int> levels,
                                    std::vector<std::string>* warnings) {
    std::string text = read_file(path);
    if (loops || levels) {
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw_parse(std::string("invalid JSON: ") + e.what());
        }
        if (loops) {
            if (!j.is_object() || !j.contains("loop_template"))
                throw_validation("--loops needs an instance built from loop_template");
            j["loop_count"] = *loops;
        }
        if (levels) {
            if (!j.is_object()) throw_validation("--levels needs a JSON object instance");
            j["levels"] = *levels;
        }
        text = j.dump();
    }
    return load_instance(text, warnings);
}

std::string fmt_g(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

std::string fmt_cost(double c) {
    if (std::abs(c - std::round(c)) < 1e-9) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(std::llround(c)));
        return buf;
    }
    return fmt_g(c);
}

std::string fmt_fail(double p) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", p);
    return buf;
}

std::string summary_line(const EvaluationReport& rep) {
    return "cost=" + fmt_cost(rep.cost) + " cycle_time=" + fmt_g(rep.cycle_time) +
           " failure_prob=" + fmt_fail(rep.failure_prob) +
           " feasible=" + (rep.feasible ? "yes" : "no");
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    for (const std::string& w : warnings) err << "warning: " << w << "\n";
}

struct CellResult {
    std::optional<EvaluationReport> report;
    std::optional<Solution> solution;
    std::string note;  // non-empty when no usable result
};

CellResult solve_instance(const ProblemInstance& inst, const std::string& algo,
                          const AcoParams& aco, const SearchLimits& limits) {
    CellResult cell;
    if (algo == "aco") {
        RunResult res = optimize(inst, aco);
        if (res.best) {
            cell.report = res.best_report;
            cell.solution = res.best;
        } else {
            cell.note = "no feasible solution found";
        }
    } else {
        ExactResult res = solve_exact(inst, limits);
        if (res.best) {
            cell.report = evaluate(inst, *res.best);
            cell.solution = res.best;
            if (res.status == ExactStatus::BudgetExhausted) cell.note = "budget exhausted";
        } else if (res.status == ExactStatus::InfeasibleProven) {
            cell.note = "no feasible solution";
        } else {
            cell.note = "budget exhausted";
        }
    }
    return cell;
}

} // namespace

int run_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (opt.algo != "aco" && opt.algo != "exact") {
            err << "error: unknown algorithm: " << opt.algo << "\n";
            return kExitInputError;
        }
        std::vector<std::string> warnings;
        ProblemInstance inst = load_with_overrides(opt.instance_path, opt.loops, opt.levels,
                                                   &warnings);
        print_warnings(warnings, err);

        if (opt.algo == "aco") {
            RunResult res = optimize(inst, opt.aco);
            if (opt.out_path) write_file(*opt.out_path, run_result_to_json(res, opt.aco));
            if (!res.best) {
                out << "no feasible solution found\n";
                return kExitInfeasible;
            }
            if (opt.dot_path) write_file(*opt.dot_path, emit_dot(inst, *res.best));
            out << summary_line(*res.best_report) << "\n";
            return kExitOk;
        }

        ExactResult res = solve_exact(inst, opt.limits);
        if (opt.out_path) write_file(*opt.out_path, exact_result_to_json(inst, res));
        if (!res.best) {
            if (res.status == ExactStatus::InfeasibleProven)
                out << "no feasible solution exists within the search limits\n";
            else
                out << "no feasible solution found (search budget exhausted)\n";
            return kExitInfeasible;
        }
        if (opt.dot_path) write_file(*opt.dot_path, emit_dot(inst, *res.best));
        if (res.status == ExactStatus::BudgetExhausted)
            err << "warning: search budget exhausted; result may be suboptimal\n";
        out << summary_line(evaluate(inst, *res.best)) << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

int run_check(const CheckOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        std::vector<std::string> warnings;
        ProblemInstance inst = load_instance(read_file(opt.instance_path), &warnings);
        print_warnings(warnings, err);
        Solution sol = solution_from_json(read_file(opt.solution_path), inst);
        EvaluationReport rep = evaluate(inst, sol);
        out << summary_line(rep) << "\n";
        for (const Violation& v : rep.violations)
            out << "violation: " << constraint_name(v.constraint) << " subject=" << v.subject
                << " " << v.detail << "\n";
        return rep.feasible ? kExitOk : kExitInfeasible;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

int run_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (opt.algo != "aco" && opt.algo != "exact") {
            err << "error: unknown algorithm: " << opt.algo << "\n";
            return kExitInputError;
        }
        if (opt.loop_counts.empty()) {
            err << "error: sweep needs at least one loop count\n";
            return kExitInputError;
        }

        std::vector<int> levels = opt.levels;
        if (levels.empty()) {
            std::vector<std::string> warnings;
            ProblemInstance probe =
                load_with_overrides(opt.instance_path, opt.loop_counts.front(), std::nullopt,
                                    &warnings);
            levels.push_back(probe.levels);
        }

        out << "    A   S       cost  cycle_time  failure_prob  note\n";
        std::string csv = "A,S,cost,cycle_time,failure_prob\n";
        bool warned = false;
        for (int S : levels) {
            for (int A : opt.loop_counts) {
                std::vector<std::string> warnings;
                ProblemInstance inst =
                    load_with_overrides(opt.instance_path, A, S, &warnings);
                if (!warned) print_warnings(warnings, err), warned = true;
                CellResult cell = solve_instance(inst, opt.algo, opt.aco, opt.limits);

                std::string cost = "-", ct = "-", fp = "-";
                if (cell.report) {
                    cost = fmt_cost(cell.report->cost);
                    ct = fmt_g(cell.report->cycle_time);
                    fp = fmt_fail(cell.report->failure_prob);
                }
                char row[160];
                std::snprintf(row, sizeof(row), "%5d  %2d  %9s  %10s  %12s", A, S, cost.c_str(),
                              ct.c_str(), fp.c_str());
                out << row;
                if (!cell.note.empty()) out << "  " << cell.note;
                out << "\n";
                csv += std::to_string(A) + "," + std::to_string(S) + "," + cost + "," + ct + "," +
                       fp + "\n";
            }
        }
        if (opt.csv_path) write_file(*opt.csv_path, csv);
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

} // namespace dcsopt
