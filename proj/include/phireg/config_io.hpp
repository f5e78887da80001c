#pragma once

#include <json.hpp>

#include "phireg/diagnostics.hpp"
#include "phireg/driver.hpp"
#include "phireg/prox.hpp"
#include "phireg/regularizer.hpp"

namespace phireg {

// JSON schemas for everything the CLI and the bindings exchange. Parse errors
// throw ConfigError with the offending key path in the message.

Regularizer regularizer_from_json(const nlohmann::json& doc);
nlohmann::json regularizer_to_json(const Regularizer& reg);

SolverConfig solver_config_from_json(const nlohmann::json& doc);
nlohmann::json solver_config_to_json(const SolverConfig& cfg);

nlohmann::json record_to_json(const IterateRecord& rec);
nlohmann::json solve_summary_to_json(const SolveResult& result, const BenchmarkProblem& problem);

nlohmann::json lemma2_report_to_json(const Lemma2Report& rep);
nlohmann::json lemma2_grid_to_json(const Lemma2GridReport& rep);
nlohmann::json optimality_report_to_json(const OptimalityReport& rep);
nlohmann::json lipschitz_result_to_json(const LipschitzProbeResult& rep);
nlohmann::json rate_report_to_json(const RateReport& rep);
nlohmann::json regularizer_properties_to_json(const RegularizerPropertyReport& rep);
nlohmann::json acceptance_check_to_json(const AcceptanceCheckReport& rep);

nlohmann::json vector_to_json_array(const Vector& v);
Vector vector_from_json_array(const nlohmann::json& arr);

} // namespace phireg
