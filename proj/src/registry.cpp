#include "cfbench/registry.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cfbench/error.hpp"

namespace cfbench {

using nlohmann::json;

const char* to_string(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::dataset: return "dataset";
        case ComponentKind::oracle: return "oracle";
        case ComponentKind::explainer: return "explainer";
        case ComponentKind::metric: return "metric";
    }
    return "?";
}

namespace {

template <class Table>
std::vector<std::string> keys(const Table& t) {
    std::vector<std::string> out;
    for (const auto& [name, _] : t) out.push_back(name);
    return out;
}

template <class Table>
auto find(const Table& t, const std::string& name) {
    return std::find_if(t.begin(), t.end(), [&](const auto& e) { return e.first == name; });
}

template <class Table, class Value>
void add(Table& t, ComponentKind kind, const std::string& name, Value v) {
    if (find(t, name) != t.end())
        throw Error(fmt::format("duplicate registration of {} '{}'", to_string(kind), name));
    t.emplace_back(name, std::move(v));
}

template <class Table>
const auto& lookup(const Table& t, const std::string& name, const std::string& path) {
    auto it = find(t, name);
    if (it == t.end())
        throw ConfigError(fmt::format("{}: unknown component '{}'; known: {}", path, name,
                                      fmt::join(keys(t), ", ")));
    return it->second;
}

}  // namespace

Registry Registry::with_builtins() {
    Registry r;
    for (const char* name : {"tree-cycles", "fixed-node-two-class"}) {
        r.add_dataset(name, [name = std::string(name)](const json& params, std::uint64_t seed,
                                                       const std::string& path) {
            return builtin_dataset_spec(name, params, seed, path);
        });
    }
    for (const char* name : {"nearest-centroid", "edge-rule"}) {
        r.add_oracle(name, [name = std::string(name)](const json& params, const std::string& path) {
            return builtin_oracle_spec(name, params, path);
        });
    }
    for (const char* name : {"dce", "obs", "dbs"}) {
        r.add_explainer(name,
                        [name = std::string(name)](const json& params, const std::string& path) {
                            return make_builtin_explainer(name, params, path);
                        });
    }
    for (const auto& m : builtin_metrics()) r.add_metric(m);
    return r;
}

void Registry::add_dataset(const std::string& name, DatasetBuilder builder) {
    add(datasets_, ComponentKind::dataset, name, std::move(builder));
}

void Registry::add_oracle(const std::string& name, OracleBuilder builder) {
    add(oracles_, ComponentKind::oracle, name, std::move(builder));
}

void Registry::add_explainer(const std::string& name, ExplainerBuilder builder) {
    add(explainers_, ComponentKind::explainer, name, std::move(builder));
}

void Registry::add_metric(MetricDef metric) {
    const std::string id = metric.id;
    add(metrics_, ComponentKind::metric, id, std::move(metric));
}

DatasetSpec Registry::create_dataset(const std::string& name, const json& params,
                                     std::uint64_t default_seed, const std::string& path) const {
    DatasetSpec spec = lookup(datasets_, name, path + ".name")(params, default_seed, path + ".params");
    spec.name = name;
    return spec;
}

OracleSpec Registry::create_oracle(const std::string& name, const json& params,
                                   const std::string& path) const {
    OracleSpec spec = lookup(oracles_, name, path + ".name")(params, path + ".params");
    spec.name = name;
    return spec;
}

std::unique_ptr<Explainer> Registry::create_explainer(const std::string& name, const json& params,
                                                      const std::string& path) const {
    return lookup(explainers_, name, path + ".name")(params, path + ".params");
}

const MetricDef& Registry::metric(const std::string& name, const std::string& path) const {
    return lookup(metrics_, name, path);
}

std::vector<std::string> Registry::names(ComponentKind kind) const {
    switch (kind) {
        case ComponentKind::dataset: return keys(datasets_);
        case ComponentKind::oracle: return keys(oracles_);
        case ComponentKind::explainer: return keys(explainers_);
        case ComponentKind::metric: return keys(metrics_);
    }
    return {};
}

bool Registry::contains(ComponentKind kind, const std::string& name) const {
    const auto n = names(kind);
    return std::find(n.begin(), n.end(), name) != n.end();
}

const Registry& default_registry() {
    static const Registry registry = Registry::with_builtins();
    return registry;
}

}  // namespace cfbench
