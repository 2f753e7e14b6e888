#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cfbench/dataset.hpp"
#include "cfbench/explainer.hpp"
#include "cfbench/metrics.hpp"
#include "cfbench/oracle.hpp"
#include "cfbench/registry.hpp"
#include "cfbench/run_log.hpp"

namespace cfbench {

struct ComponentConfig {
    std::string name;
    nlohmann::json params = nlohmann::json::object();

    friend bool operator==(const ComponentConfig&, const ComponentConfig&) = default;
};

struct DatasetConfig {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
    std::optional<std::string> path;

    friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct ExplainerConfig {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
    // Row name in reports; defaults to name.
    std::string label;

    friend bool operator==(const ExplainerConfig&, const ExplainerConfig&) = default;
};

struct RunConfig {
    std::string run_id;
    std::uint64_t seed = 0;
    std::string data_dir = "data";
    std::string model_dir = "models";
    std::string output_dir = "output";
    DatasetConfig dataset;
    ComponentConfig oracle;
    std::vector<ExplainerConfig> explainers;
    std::vector<std::string> metrics;
    std::size_t parallelism = 1;
    std::vector<std::string> output_formats;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Strict JSON schema: unknown keys are rejected and every component name and
// parameter is validated against the registry. Errors are ConfigError with a
// path to the field.
RunConfig parse_config(std::string_view bytes, const Registry& registry = default_registry());

nlohmann::json to_json(const RunConfig& cfg);

// CFBENCH_DATA_DIR / CFBENCH_MODEL_DIR, when set, replace the config paths.
void apply_env_overrides(RunConfig& cfg);

struct ExplainerResult {
    std::string label;
    std::string name;
    std::vector<EvaluationRecord> records;
    AggregateRow aggregate;
    // Final call counter of the Evaluator; equals the sum of records' calls.
    std::uint64_t evaluator_calls = 0;
};

struct RunReport {
    std::string run_id;
    nlohmann::json config;
    std::vector<std::string> metrics;
    std::string oracle;
    double oracle_training_accuracy = 0.0;
    std::vector<ExplainerResult> results;
    std::string version;
    std::string timestamp;
    double total_wall_time_s = 0.0;
};

// One benchmark cell: explainer, dataset, oracle and metric set. evaluate()
// may be called concurrently for different instances; each call runs on its
// own counting handle and seeded generator.
class Evaluator {
public:
    Evaluator(std::string label, std::shared_ptr<const Explainer> explainer,
              std::shared_ptr<const Dataset> dataset, OracleHandle oracle,
              std::vector<MetricDef> metrics, std::uint64_t run_seed);

    EvaluationRecord evaluate(std::size_t instance_index) const;

    std::vector<EvaluationRecord> evaluate_all() const;

    std::uint64_t calls() const { return calls_.load(); }
    const std::string& label() const { return label_; }
    const Explainer& explainer() const { return *explainer_; }
    const Dataset& dataset() const { return *dataset_; }
    const std::vector<MetricDef>& metrics() const { return metrics_; }

private:
    std::string label_;
    std::shared_ptr<const Explainer> explainer_;
    std::shared_ptr<const Dataset> dataset_;
    OracleHandle oracle_;
    std::vector<MetricDef> metrics_;
    std::uint64_t run_seed_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

// ensure_dataset, ensure_oracle, one Evaluator per explainer, every instance,
// aggregation. Writes nothing but the dataset/model caches.
RunReport execute(const RunConfig& cfg, const Registry& registry, RunLog& log);

// execute() then write_report() in the configured formats. On failure a
// PARTIAL marker holding the error is written to the run directory.
RunReport run(const RunConfig& cfg, const Registry& registry, RunLog& log);

std::filesystem::path run_directory(const RunConfig& cfg);

}  // namespace cfbench
