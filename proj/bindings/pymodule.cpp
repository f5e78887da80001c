#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phireg/acceptance.hpp"
#include "phireg/config_io.hpp"
#include "phireg/diagnostics.hpp"
#include "phireg/driver.hpp"
#include "phireg/oracle.hpp"
#include "phireg/prox.hpp"
#include "phireg/regularizer.hpp"
#include "phireg/rng.hpp"

namespace py = pybind11;
using namespace phireg;

namespace {

ProxBackendChoice backend_from_name(const std::string& name) {
  if (name == "auto") return ProxBackendChoice::automatic;
  if (name == "closed_form") return ProxBackendChoice::closed_form;
  if (name == "bundle") return ProxBackendChoice::bundle;
  throw std::invalid_argument("unknown prox backend '" + name + "'");
}

SolverConfig solver_from_json_string(const std::string& text) {
  if (text.empty()) return SolverConfig{};
  return solver_config_from_json(nlohmann::json::parse(text));
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "nonsmooth convex solver core: smoothed envelopes, certified inexact "
            "prox evaluations, nonmonotone line search, and rate diagnostics";

  py::class_<BenchmarkProblem>(m, "Problem")
      .def_property_readonly("name", [](const BenchmarkProblem& p) { return p.name; })
      .def_property_readonly("kind", [](const BenchmarkProblem& p) { return p.kind; })
      .def_property_readonly("dimension",
                             [](const BenchmarkProblem& p) { return p.oracle.dimension; })
      .def_property_readonly("known_minimizer",
                             [](const BenchmarkProblem& p) { return p.known_minimizer; })
      .def_property_readonly("known_minimum",
                             [](const BenchmarkProblem& p) { return p.known_minimum; })
      .def("value", [](const BenchmarkProblem& p, const Vector& x) { return p.oracle.value(x); })
      .def("subgradient",
           [](const BenchmarkProblem& p, const Vector& x) { return p.oracle.subgradient(x); })
      .def("eval", [](const BenchmarkProblem& p, const Vector& x) { return eval(p.oracle, x); })
      .def("to_json", [](const BenchmarkProblem& p) { return problem_to_json(p).dump(); })
      .def("__repr__", [](const BenchmarkProblem& p) {
        return "<Problem " + p.name + " n=" + std::to_string(p.oracle.dimension) + ">";
      });

  m.def("problem_from_json",
        [](const std::string& text) { return problem_from_json(nlohmann::json::parse(text)); });
  m.def("make_problem_suite", &make_problem_suite);
  m.def("make_abs_problem", &make_abs_problem);
  m.def("make_l1_problem", &make_l1_problem, py::arg("dimension"));
  m.def("make_maxq_problem", &make_maxq_problem, py::arg("dimension"));
  m.def("make_max_affine_problem",
        py::overload_cast<int, int, std::uint64_t>(&make_max_affine_problem),
        py::arg("dimension"), py::arg("extra_pieces"), py::arg("seed"));
  m.def("make_composite_problem",
        py::overload_cast<int, double, std::uint64_t>(&make_composite_problem),
        py::arg("dimension"), py::arg("mu"), py::arg("seed"));
  m.def("make_quadratic_problem", &make_quadratic_problem, py::arg("Q"), py::arg("b"));

  py::class_<Regularizer>(m, "Regularizer")
      .def_static("quadratic", &Regularizer::quadratic, py::arg("lam"))
      .def_static("metric", &Regularizer::metric, py::arg("M"), py::arg("lam"))
      .def_property_readonly("lam", &Regularizer::lambda)
      .def_property_readonly("beta", &Regularizer::beta)
      .def_property_readonly("lip_L", &Regularizer::lip_L)
      .def("phi", &Regularizer::phi, py::arg("z"), py::arg("x"))
      .def("grad_z", &Regularizer::grad_z, py::arg("z"), py::arg("x"))
      .def("grad_x", &Regularizer::grad_x, py::arg("z"), py::arg("x"));

  m.def("lipschitz_of_envelope", &lipschitz_of_envelope);

  py::class_<EnvelopeValue>(m, "EnvelopeValue")
      .def_readonly("f_phi", &EnvelopeValue::f_phi)
      .def_readonly("p", &EnvelopeValue::p)
      .def_readonly("grad", &EnvelopeValue::grad);

  m.def(
      "exact_envelope",
      [](const BenchmarkProblem& p, const Regularizer& reg, const Vector& x, double tol) {
        return exact_envelope(p, reg, x, tol);
      },
      py::arg("problem"), py::arg("reg"), py::arg("x"), py::arg("tol") = 1e-9);

  py::class_<ProxCertificate>(m, "ProxCertificate")
      .def_readonly("p_a", &ProxCertificate::p_a)
      .def_readonly("f_phi_a", &ProxCertificate::f_phi_a)
      .def_readonly("g_a", &ProxCertificate::g_a)
      .def_readonly("epsilon", &ProxCertificate::epsilon)
      .def_readonly("lower_bound", &ProxCertificate::lower_bound)
      .def_readonly("cuts_used", &ProxCertificate::cuts_used)
      .def_property_readonly("backend", [](const ProxCertificate& c) {
        return c.backend == ProxBackend::closed_form ? "closed_form" : "bundle";
      });

  m.def(
      "inexact_prox",
      [](const BenchmarkProblem& p, const Regularizer& reg, const Vector& x, double epsilon,
         const std::string& backend) {
        return inexact_prox(p, reg, x, epsilon, backend_from_name(backend));
      },
      py::arg("problem"), py::arg("reg"), py::arg("x"), py::arg("epsilon"),
      py::arg("backend") = "auto");

  m.def(
      "verify_lemma2",
      [](const BenchmarkProblem& p, const Regularizer& reg, const Vector& x, double epsilon,
         double exact_tol) {
        const EnvelopeValue exact = exact_envelope(p, reg, x, exact_tol);
        const ProxCertificate cert = inexact_prox(p, reg, x, epsilon, ProxBackendChoice::bundle);
        return lemma2_report_to_json(verify_lemma2(p, reg, x, epsilon, exact, cert, exact_tol))
            .dump();
      },
      py::arg("problem"), py::arg("reg"), py::arg("x"), py::arg("epsilon"),
      py::arg("exact_tol") = 1e-10);

  m.def(
      "solve",
      [](const BenchmarkProblem& p, const Regularizer& reg, const Vector& x0,
         const std::string& solver_json) {
        const SolveResult result = solve(p, reg, x0, solver_from_json_string(solver_json));
        std::string trace;
        for (const auto& rec : result.trace) trace += record_to_json(rec).dump() + "\n";
        return py::make_tuple(solve_summary_to_json(result, p).dump(), trace);
      },
      py::arg("problem"), py::arg("reg"), py::arg("x0"), py::arg("solver_json") = "");

  m.def(
      "rate",
      [](const BenchmarkProblem& p, const Regularizer& reg, const Vector& x0,
         const std::string& solver_json) {
        if (!p.known_minimizer)
          throw std::invalid_argument("rate: problem carries no reference minimizer");
        const SolveResult result = solve(p, reg, x0, solver_from_json_string(solver_json));
        nlohmann::json doc{{"summary", solve_summary_to_json(result, p)}};
        doc["rate"] = rate_report_to_json(rate_report(result.trace, *p.known_minimizer));
        return doc.dump();
      },
      py::arg("problem"), py::arg("reg"), py::arg("x0"), py::arg("solver_json") = "");

  m.def(
      "optimality_report",
      [](const BenchmarkProblem& p, const Regularizer& reg, const Vector& x, double tol) {
        return optimality_report_to_json(optimality_report(p, reg, x, tol)).dump();
      },
      py::arg("problem"), py::arg("reg"), py::arg("x"), py::arg("tol") = 1e-8);

  m.def(
      "lipschitz_probe",
      [](const BenchmarkProblem& p, const Regularizer& reg, int n_pairs, double lo, double hi,
         std::uint64_t seed) {
        return lipschitz_result_to_json(lipschitz_probe(p, reg, n_pairs, lo, hi,
                                                        CounterRng(seed, 7004)))
            .dump();
      },
      py::arg("problem"), py::arg("reg"), py::arg("n_pairs") = 1000, py::arg("lo") = -5.0,
      py::arg("hi") = 5.0, py::arg("seed") = 12345);

  m.def(
      "run_criterion",
      [](int index, std::uint64_t seed) {
        const auto result = acceptance::run_criterion(index, seed);
        return py::make_tuple(result.name, result.pass, result.statistic);
      },
      py::arg("index"), py::arg("seed") = 12345);
}
