#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpbf/core.hpp"
#include "lpbf/param_parser.hpp"
#include "lpbf/predictor.hpp"

namespace lpbf {

nlohmann::ordered_json to_json(const ProcessParameters& p);
nlohmann::ordered_json to_json(const Record& r);
Record record_from_json(const nlohmann::json& j);

// One Record per line.
void write_records(const std::vector<Record>& records, const std::string& path);
std::vector<Record> read_records(const std::string& path);

// Service/CLI shapes: params use unit-suffixed keys (power_w, ...).
nlohmann::ordered_json labels_json(const DefectLabels& labels);
nlohmann::ordered_json params_json(const ProcessParameters& p);
nlohmann::ordered_json to_json(const ParseResult& r);
nlohmann::ordered_json to_json(const Prediction& p);

}  // namespace lpbf
