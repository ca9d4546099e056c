#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "neurolesion/scenario.hpp"

namespace neurolesion {

nlohmann::json scenario_config_to_json(const ScenarioConfig& config);
std::string config_hash(const ScenarioConfig& config);

// Canonical report (nlohmann objects keep keys sorted). generated_at is the
// only field that varies between identical runs.
nlohmann::json scenario_result_to_json(const ScenarioResult& result, bool with_timestamp = true);
std::string scenario_report_text(const ScenarioResult& result, bool with_timestamp = true);

// Table-2-shaped summary: one row per scenario in id order with the training
// algorithm, activation, measured impact and measured nearest-neighbor share.
nlohmann::json summary_to_json(const std::vector<ScenarioResult>& results,
                               bool with_timestamp = true);
std::string summary_csv(const std::vector<ScenarioResult>& results);

// One row per survivor: layer,index,distance,delta,share.
std::string compensation_csv(const CompensationReport& report);

// Structural check against the published schema
// (schemas/scenario_report.schema.json); returns human-readable violations,
// empty when the document conforms.
std::vector<std::string> validate_scenario_report(const nlohmann::json& report);

std::string iso8601_utc_now();

}  // namespace neurolesion
