#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "cfbench/graph.hpp"
#include "cfbench/run_log.hpp"

namespace cfbench {

class Rng;

// Ordered collection of graph instances. Ids are exactly 0..N-1 in order and
// both classes are present; the constructor throws DatasetError otherwise.
class Dataset {
public:
    Dataset(std::string name, std::vector<GraphInstance> instances,
            nlohmann::json generation_params = nlohmann::json::object());

    const std::string& name() const { return name_; }
    const std::vector<GraphInstance>& instances() const { return instances_; }
    const GraphInstance& operator[](std::size_t i) const { return instances_[i]; }
    std::size_t size() const { return instances_.size(); }
    const nlohmann::json& generation_params() const { return generation_params_; }

    // Instances per class, indexed by label.
    std::array<std::size_t, 2> class_counts() const;

    // Common node count, or nullopt if instances differ.
    std::optional<std::size_t> fixed_num_nodes() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::string name_;
    std::vector<GraphInstance> instances_;
    nlohmann::json generation_params_;
};

// Per-slot empirical frequency of each edge within each class, over a
// fixed node set. Slots follow edge_to_slot ordering.
class EdgeProbabilityTable {
public:
    EdgeProbabilityTable(std::size_t num_nodes, Eigen::ArrayXd class0, Eigen::ArrayXd class1);

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_slots() const { return static_cast<std::size_t>(p0_.size()); }

    // Probabilities for class 0 or 1 over all slots.
    const Eigen::ArrayXd& of_class(ClassLabel c) const { return c == 0 ? p0_ : p1_; }

    std::pair<double, double> at(NodeIndex u, NodeIndex v) const;

private:
    std::size_t num_nodes_;
    Eigen::ArrayXd p0_;
    Eigen::ArrayXd p1_;
};

EdgeProbabilityTable edge_probabilities(const Dataset& d);

struct TreeCyclesParams {
    std::size_t n_instances = 500;
    std::size_t nodes_per_instance = 300;
    std::size_t max_cycles = 6;
    std::uint64_t seed = 0;
};

struct FixedNodeTwoClassParams {
    std::size_t n_instances = 101;
    std::size_t num_nodes = 116;
    double base_density = 0.097;
    std::size_t n_discriminative = 40;
    double delta = 0.09;
    std::uint64_t seed = 0;
};

// Random-attachment tree: node i > 0 attaches to a uniformly drawn earlier node.
GraphInstance make_random_tree(std::uint64_t id, std::size_t num_nodes, Rng& rng);

// Tree backbone with 1..max_cycles rings of 3..6 fresh nodes, each ring joined
// to the backbone by one edge.
GraphInstance make_tree_with_cycles(std::uint64_t id, std::size_t num_nodes, std::size_t max_cycles,
                                    Rng& rng);

Dataset generate_tree_cycles(const TreeCyclesParams& p);

Dataset generate_fixed_node_two_class(const FixedNodeTwoClassParams& p);

nlohmann::json to_json(const TreeCyclesParams& p);
nlohmann::json to_json(const FixedNodeTwoClassParams& p);

// JSON-lines: a header {name, generation_params, n_instances} then one
// instance per line. Written via temp file + rename.
void save(const Dataset& d, const std::filesystem::path& path);
Dataset load(const std::filesystem::path& path);

std::string serialize_jsonl(const Dataset& d);
Dataset parse_jsonl(const std::string& text);

// FNV-1a over the canonical serialization.
std::uint64_t content_hash(const Dataset& d);

std::string hash_hex(std::uint64_t h);

// Hash of the canonical dump of a parameter object.
std::string params_hash(const nlohmann::json& params);

TreeCyclesParams tree_cycles_params(const nlohmann::json& params, const std::string& path,
                                    std::uint64_t default_seed);
FixedNodeTwoClassParams fixed_node_two_class_params(const nlohmann::json& params,
                                                    const std::string& path,
                                                    std::uint64_t default_seed);

// A named generator with fully normalized parameters. params is exactly what
// the generated file records as generation_params.
struct DatasetSpec {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
    std::optional<std::filesystem::path> path;
    std::function<Dataset()> generate;
};

// Spec for one of the built-in generators ("tree-cycles",
// "fixed-node-two-class"). User params are validated strictly; a missing seed
// falls back to default_seed.
DatasetSpec builtin_dataset_spec(const std::string& name, const nlohmann::json& user_params,
                                 std::uint64_t default_seed,
                                 const std::string& path = "dataset.params");

std::filesystem::path default_dataset_path(const DatasetSpec& spec,
                                           const std::filesystem::path& data_dir);

// Loads the dataset at spec.path (or the default path under data_dir) if it
// exists, otherwise generates, saves and returns it. Stored generation params
// that differ from spec.params raise ConfigError. Nothing is written when
// generation fails.
Dataset ensure_dataset(const DatasetSpec& spec, const std::filesystem::path& data_dir,
                       RunLog& log);

}  // namespace cfbench
