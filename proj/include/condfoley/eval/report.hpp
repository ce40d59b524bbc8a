// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "condfoley/eval/metrics.hpp"

namespace condfoley::eval {

// Deterministically ordered JSON (diff-friendly) plus a per-pair CSV table.
nlohmann::ordered_json report_to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

void save_report(const EvalReport& r, const std::string& json_path, const std::string& csv_path);
EvalReport load_report(const std::string& json_path);

}  // namespace condfoley::eval
