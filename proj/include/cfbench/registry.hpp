#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cfbench/dataset.hpp"
#include "cfbench/explainer.hpp"
#include "cfbench/metrics.hpp"
#include "cfbench/oracle.hpp"

namespace cfbench {

enum class ComponentKind { dataset, oracle, explainer, metric };

const char* to_string(ComponentKind kind);

// Factory registry: components are created by (kind, name, params) without
// callers touching concrete constructors. Registering a (kind, name) pair
// twice throws.
class Registry {
public:
    using DatasetBuilder = std::function<DatasetSpec(const nlohmann::json& params,
                                                     std::uint64_t default_seed,
                                                     const std::string& path)>;
    using OracleBuilder =
        std::function<OracleSpec(const nlohmann::json& params, const std::string& path)>;
    using ExplainerBuilder = std::function<std::unique_ptr<Explainer>(
        const nlohmann::json& params, const std::string& path)>;

    // Registry holding tree-cycles, fixed-node-two-class, nearest-centroid,
    // edge-rule, dce, obs, dbs and the seven metrics.
    static Registry with_builtins();

    void add_dataset(const std::string& name, DatasetBuilder builder);
    void add_oracle(const std::string& name, OracleBuilder builder);
    void add_explainer(const std::string& name, ExplainerBuilder builder);
    void add_metric(MetricDef metric);

    // `path` prefixes error messages (e.g. "explainers[1]").
    DatasetSpec create_dataset(const std::string& name, const nlohmann::json& params,
                               std::uint64_t default_seed, const std::string& path = "dataset") const;
    OracleSpec create_oracle(const std::string& name, const nlohmann::json& params,
                             const std::string& path = "oracle") const;
    std::unique_ptr<Explainer> create_explainer(const std::string& name,
                                                const nlohmann::json& params,
                                                const std::string& path = "explainer") const;
    const MetricDef& metric(const std::string& name, const std::string& path = "metrics") const;

    // Names in registration order.
    std::vector<std::string> names(ComponentKind kind) const;
    bool contains(ComponentKind kind, const std::string& name) const;

private:
    template <class T>
    using Table = std::vector<std::pair<std::string, T>>;

    Table<DatasetBuilder> datasets_;
    Table<OracleBuilder> oracles_;
    Table<ExplainerBuilder> explainers_;
    Table<MetricDef> metrics_;
};

const Registry& default_registry();

}  // namespace cfbench
