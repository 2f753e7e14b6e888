#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfbench/harness.hpp"

namespace cfbench {

// Per-instance rows, fixed columns: run_id, explainer, instance_id,
// runtime_s, ged, calls, correctness, sparsity, edit_ratio, fidelity,
// oracle_correct, found.
std::string render_csv(const RunReport& r);

// Aggregate table: Exp. then the selected metrics in table order.
std::string render_markdown(const RunReport& r);

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

// Writes records.csv / report.json / report.md under <output_dir>/<run_id>/.
std::vector<std::filesystem::path> write_report(const RunReport& r,
                                                const std::vector<std::string>& formats,
                                                const std::filesystem::path& output_dir);

}  // namespace cfbench
