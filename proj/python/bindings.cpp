#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dcsopt/aco.hpp"
#include "dcsopt/commands.hpp"
#include "dcsopt/dot.hpp"
#include "dcsopt/evaluator.hpp"
#include "dcsopt/exact.hpp"
#include "dcsopt/model.hpp"

namespace py = pybind11;
using namespace dcsopt;

PYBIND11_MODULE(_core, m) {
    m.doc() = "core solvers for hierarchical control structure synthesis";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::class_<ProblemInstance>(m, "ProblemInstance")
        .def_property_readonly("levels", [](const ProblemInstance& i) { return i.levels; })
        .def_property_readonly("t_max", [](const ProblemInstance& i) { return i.t_max; })
        .def_property_readonly("p_max", [](const ProblemInstance& i) { return i.p_max; })
        .def_property_readonly("loop_count",
                               [](const ProblemInstance& i) { return i.loops.size(); })
        .def_property_readonly("device_count",
                               [](const ProblemInstance& i) { return i.catalog.size(); })
        .def("__repr__", [](const ProblemInstance& i) {
            return "<ProblemInstance types=" + std::to_string(i.catalog.size()) +
                   " loops=" + std::to_string(i.loops.size()) +
                   " levels=" + std::to_string(i.levels) + ">";
        });

    py::class_<Solution>(m, "Solution")
        .def_property_readonly("node_count",
                               [](const Solution& s) { return s.topology.size(); })
        .def("to_json", &solution_to_json)
        .def("__repr__", [](const Solution& s) {
            return "<Solution nodes=" + std::to_string(s.topology.size()) + " loops=" +
                   std::to_string(s.placement.connection.size()) + ">";
        });

    m.def("load_instance",
          [](const std::string& text) { return load_instance(text, nullptr); },
          py::arg("text"));
    m.def("serialize_instance", &serialize_instance, py::arg("instance"));
    m.def("solution_from_json", &solution_from_json, py::arg("text"), py::arg("instance"));
    m.def("emit_dot", &emit_dot, py::arg("instance"), py::arg("solution"));

    m.def("evaluate_json",
          [](const ProblemInstance& inst, const Solution& sol) {
              return report_to_json(evaluate(inst, sol));
          },
          py::arg("instance"), py::arg("solution"));

    m.def("optimize_json",
          [](const ProblemInstance& inst, int ants, int iterations, double alpha, double beta,
             double rho, std::optional<double> q, std::uint64_t seed, double tau0, int max_nodes,
             bool local_search) {
              AcoParams params;
              params.ants = ants;
              params.iterations = iterations;
              params.alpha = alpha;
              params.beta = beta;
              params.rho = rho;
              params.q = q;
              params.seed = seed;
              params.tau0 = tau0;
              params.max_nodes = max_nodes;
              params.local_search = local_search;
              return run_result_to_json(optimize(inst, params), params);
          },
          py::arg("instance"), py::arg("ants") = 20, py::arg("iterations") = 200,
          py::arg("alpha") = 1.0, py::arg("beta") = 2.0, py::arg("rho") = 0.1,
          py::arg("q") = py::none(), py::arg("seed") = 1, py::arg("tau0") = 1.0,
          py::arg("max_nodes") = 512, py::arg("local_search") = true);

    m.def("solve_exact_json",
          [](const ProblemInstance& inst, int max_total_nodes, double time_budget) {
              SearchLimits limits;
              limits.max_total_nodes = max_total_nodes;
              limits.time_budget = time_budget;
              return exact_result_to_json(inst, solve_exact(inst, limits));
          },
          py::arg("instance"), py::arg("max_total_nodes") = 0, py::arg("time_budget") = 60.0);
}
