#include "cfbench/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "cfbench/error.hpp"
#include "cfbench/fs_util.hpp"
#include "cfbench/params.hpp"
#include "cfbench/rng.hpp"

namespace cfbench {

namespace fs = std::filesystem;
using nlohmann::json;

Dataset::Dataset(std::string name, std::vector<GraphInstance> instances, json generation_params)
    : name_(std::move(name)),
      instances_(std::move(instances)),
      generation_params_(std::move(generation_params)) {
    if (instances_.empty()) throw DatasetError(fmt::format("dataset '{}' is empty", name_));
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        if (instances_[i].id() != i)
            throw DatasetError(fmt::format("dataset '{}': instance at position {} has id {}", name_,
                                           i, instances_[i].id()));
    }
    const auto counts = class_counts();
    if (counts[0] == 0 || counts[1] == 0)
        throw DatasetError(fmt::format("dataset '{}': single-class dataset (class counts {}/{})",
                                       name_, counts[0], counts[1]));
}

std::array<std::size_t, 2> Dataset::class_counts() const {
    std::array<std::size_t, 2> counts{0, 0};
    for (const auto& g : instances_) ++counts[static_cast<std::size_t>(g.label())];
    return counts;
}

std::optional<std::size_t> Dataset::fixed_num_nodes() const {
    const std::size_t n = instances_.front().num_nodes();
    for (const auto& g : instances_)
        if (g.num_nodes() != n) return std::nullopt;
    return n;
}

EdgeProbabilityTable::EdgeProbabilityTable(std::size_t num_nodes, Eigen::ArrayXd class0,
                                           Eigen::ArrayXd class1)
    : num_nodes_(num_nodes), p0_(std::move(class0)), p1_(std::move(class1)) {
    const auto slots = static_cast<Eigen::Index>(slot_count(num_nodes_));
    if (p0_.size() != slots || p1_.size() != slots)
        throw ValidationError("edge probability table: slot count mismatch");
    if ((p0_ < 0.0).any() || (p0_ > 1.0).any() || (p1_ < 0.0).any() || (p1_ > 1.0).any())
        throw ValidationError("edge probability table: probability outside [0,1]");
}

std::pair<double, double> EdgeProbabilityTable::at(NodeIndex u, NodeIndex v) const {
    if (u == v || u >= num_nodes_ || v >= num_nodes_)
        throw ValidationError(fmt::format("edge probability table: no slot [{},{}]", u, v));
    const auto s = static_cast<Eigen::Index>(edge_to_slot(Edge(u, v), num_nodes_));
    return {p0_[s], p1_[s]};
}

EdgeProbabilityTable edge_probabilities(const Dataset& d) {
    const auto n = d.fixed_num_nodes();
    if (!n)
        throw ValidationError(
            fmt::format("dataset '{}': edge probabilities need a fixed node count", d.name()));
    const auto slots = static_cast<Eigen::Index>(slot_count(*n));
    Eigen::ArrayXd count0 = Eigen::ArrayXd::Zero(slots);
    Eigen::ArrayXd count1 = Eigen::ArrayXd::Zero(slots);
    for (const auto& g : d.instances()) {
        Eigen::ArrayXd& target = g.label() == 0 ? count0 : count1;
        for (const Edge& e : g.edges()) target[static_cast<Eigen::Index>(edge_to_slot(e, *n))] += 1.0;
    }
    const auto counts = d.class_counts();
    return EdgeProbabilityTable(*n, count0 / static_cast<double>(counts[0]),
                                count1 / static_cast<double>(counts[1]));
}

GraphInstance make_random_tree(std::uint64_t id, std::size_t num_nodes, Rng& rng) {
    std::vector<Edge> edges;
    edges.reserve(num_nodes > 0 ? num_nodes - 1 : 0);
    for (std::size_t i = 1; i < num_nodes; ++i)
        edges.emplace_back(static_cast<NodeIndex>(rng.uniform_int(0, i - 1)),
                           static_cast<NodeIndex>(i));
    return GraphInstance(id, num_nodes, std::move(edges), 0);
}

namespace {

constexpr std::size_t kMinCycle = 3;
constexpr std::size_t kMaxCycle = 6;

}  // namespace

GraphInstance make_tree_with_cycles(std::uint64_t id, std::size_t num_nodes, std::size_t max_cycles,
                                    Rng& rng) {
    if (num_nodes < kMinCycle)
        throw ValidationError(
            fmt::format("tree-cycles: {} nodes cannot hold a cycle (need >= 3)", num_nodes));
    if (max_cycles == 0) throw ValidationError("tree-cycles: max_cycles must be positive");

    const auto k = static_cast<std::size_t>(rng.uniform_int(1, max_cycles));
    std::vector<std::size_t> sizes(k);
    for (auto& s : sizes) s = static_cast<std::size_t>(rng.uniform_int(kMinCycle, kMaxCycle));

    // Leave at least one backbone node where possible.
    auto total = [&] { return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}); };
    while (sizes.size() > 1 && total() > num_nodes - 1) sizes.pop_back();
    if (total() > num_nodes - 1) sizes.front() = std::max(kMinCycle, num_nodes - 1);

    const std::size_t backbone = num_nodes - total();
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < backbone; ++i)
        edges.emplace_back(static_cast<NodeIndex>(rng.uniform_int(0, i - 1)),
                           static_cast<NodeIndex>(i));

    std::size_t start = backbone;
    for (std::size_t s : sizes) {
        for (std::size_t j = 0; j < s; ++j)
            edges.emplace_back(static_cast<NodeIndex>(start + j),
                               static_cast<NodeIndex>(start + (j + 1) % s));
        if (backbone > 0) {
            const auto ring_node = start + rng.uniform_int(0, s - 1);
            const auto anchor = rng.uniform_int(0, backbone - 1);
            edges.emplace_back(static_cast<NodeIndex>(anchor), static_cast<NodeIndex>(ring_node));
        }
        start += s;
    }
    return GraphInstance(id, num_nodes, std::move(edges), 1);
}

json to_json(const TreeCyclesParams& p) {
    return {{"generator", "tree-cycles"},
            {"n_instances", p.n_instances},
            {"nodes_per_instance", p.nodes_per_instance},
            {"max_cycles", p.max_cycles},
            {"seed", p.seed},
            {"tree", "random-attachment"},
            {"cycle_count", "uniform[1,max_cycles]"},
            {"cycle_size", fmt::format("uniform[{},{}]", kMinCycle, kMaxCycle)},
            {"class_one_probability", 0.5}};
}

json to_json(const FixedNodeTwoClassParams& p) {
    return {{"generator", "fixed-node-two-class"},
            {"n_instances", p.n_instances},
            {"num_nodes", p.num_nodes},
            {"base_density", p.base_density},
            {"n_discriminative", p.n_discriminative},
            {"delta", p.delta},
            {"seed", p.seed},
            {"class_one_probability", 0.5}};
}

namespace {

void validate(const TreeCyclesParams& p, const std::string& path) {
    if (p.n_instances == 0) throw ConfigError(path + ".n_instances: expected a positive integer");
    if (p.max_cycles == 0) throw ConfigError(path + ".max_cycles: expected a positive integer");
    if (p.nodes_per_instance < kMinCycle)
        throw ConfigError(fmt::format("{}.nodes_per_instance: must be >= {} to hold a cycle", path,
                                      kMinCycle));
}

void validate(const FixedNodeTwoClassParams& p, const std::string& path) {
    if (p.n_instances == 0) throw ConfigError(path + ".n_instances: expected a positive integer");
    if (p.num_nodes < 2) throw ConfigError(path + ".num_nodes: must be >= 2");
    if (p.n_discriminative == 0 || p.n_discriminative > slot_count(p.num_nodes))
        throw ConfigError(fmt::format("{}.n_discriminative: must be in [1, {}]", path,
                                      slot_count(p.num_nodes)));
    if (!(p.base_density >= 0.0 && p.base_density <= 1.0))
        throw ConfigError(path + ".base_density: expected a probability in [0,1]");
    if (!(p.delta >= 0.0 && p.base_density - p.delta >= 0.0 && p.base_density + p.delta <= 1.0))
        throw ConfigError(fmt::format("{}.delta: base_density +/- delta must stay in [0,1] (got {} +/- {})",
                                      path, p.base_density, p.delta));
}

}  // namespace

Dataset generate_tree_cycles(const TreeCyclesParams& p) {
    validate(p, "tree-cycles");
    Rng rng(p.seed);
    std::vector<GraphInstance> instances;
    instances.reserve(p.n_instances);
    for (std::size_t i = 0; i < p.n_instances; ++i) {
        if (rng.bernoulli(0.5))
            instances.push_back(make_tree_with_cycles(i, p.nodes_per_instance, p.max_cycles, rng));
        else
            instances.push_back(make_random_tree(i, p.nodes_per_instance, rng));
    }
    return Dataset("tree-cycles", std::move(instances), to_json(p));
}

Dataset generate_fixed_node_two_class(const FixedNodeTwoClassParams& p) {
    validate(p, "fixed-node-two-class");
    Rng rng(p.seed);
    const std::size_t slots = slot_count(p.num_nodes);

    std::vector<std::size_t> order(slots);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < p.n_discriminative; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(i, slots - 1));
        std::swap(order[i], order[j]);
    }
    std::vector<char> discriminative(slots, 0);
    for (std::size_t i = 0; i < p.n_discriminative; ++i) discriminative[order[i]] = 1;

    std::vector<GraphInstance> instances;
    instances.reserve(p.n_instances);
    for (std::size_t i = 0; i < p.n_instances; ++i) {
        const ClassLabel label = rng.bernoulli(0.5) ? 1 : 0;
        const double shifted = label == 1 ? p.base_density + p.delta : p.base_density - p.delta;
        std::vector<Edge> edges;
        for (std::size_t s = 0; s < slots; ++s) {
            if (rng.bernoulli(discriminative[s] ? shifted : p.base_density))
                edges.push_back(slot_to_edge(s, p.num_nodes));
        }
        instances.emplace_back(i, p.num_nodes, std::move(edges), label);
    }
    return Dataset("fixed-node-two-class", std::move(instances), to_json(p));
}

std::string serialize_jsonl(const Dataset& d) {
    std::string out = json{{"name", d.name()},
                           {"generation_params", d.generation_params()},
                           {"n_instances", d.size()}}
                          .dump();
    out += '\n';
    for (const auto& g : d.instances()) {
        out += to_json(g).dump();
        out += '\n';
    }
    return out;
}

Dataset parse_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto parse_line = [&](const std::string& l) {
        try {
            return json::parse(l);
        } catch (const json::parse_error& e) {
            throw DatasetError(fmt::format("line {}: malformed JSON: {}", line_no, e.what()));
        }
    };

    if (!std::getline(in, line)) throw DatasetError("dataset file is empty");
    ++line_no;
    const json header = parse_line(line);
    if (!header.is_object() || !header.contains("name") || !header["name"].is_string() ||
        !header.contains("generation_params") || !header["generation_params"].is_object() ||
        !header.contains("n_instances") || !header["n_instances"].is_number_unsigned() ||
        header.size() != 3)
        throw DatasetError("line 1: header must be {name, generation_params, n_instances}");

    std::vector<GraphInstance> instances;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            instances.push_back(graph_from_json(parse_line(line)));
        } catch (const DatasetError& e) {
            throw DatasetError(fmt::format("line {}: {}", line_no, e.what()));
        }
    }
    const auto expected = header["n_instances"].get<std::size_t>();
    if (instances.size() != expected)
        throw DatasetError(fmt::format("header declares {} instances, file holds {}", expected,
                                       instances.size()));
    return Dataset(header["name"].get<std::string>(), std::move(instances),
                   header["generation_params"]);
}

void save(const Dataset& d, const fs::path& path) { write_file_atomic(path, serialize_jsonl(d)); }

Dataset load(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_jsonl(text);
    } catch (const DatasetError& e) {
        throw DatasetError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::uint64_t content_hash(const Dataset& d) { return fnv1a64(serialize_jsonl(d)); }

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::string params_hash(const json& params) { return hash_hex(fnv1a64(params.dump())); }

TreeCyclesParams tree_cycles_params(const json& params, const std::string& path,
                                    std::uint64_t default_seed) {
    ParamReader r(params, path);
    TreeCyclesParams p;
    p.n_instances = r.positive("n_instances", p.n_instances, {"n"});
    p.nodes_per_instance = r.positive("nodes_per_instance", p.nodes_per_instance, {"nodes"});
    p.max_cycles = r.positive("max_cycles", p.max_cycles);
    p.seed = r.uint("seed", default_seed);
    r.finish();
    validate(p, path);
    return p;
}

FixedNodeTwoClassParams fixed_node_two_class_params(const json& params, const std::string& path,
                                                    std::uint64_t default_seed) {
    ParamReader r(params, path);
    FixedNodeTwoClassParams p;
    p.n_instances = r.positive("n_instances", p.n_instances, {"n"});
    p.num_nodes = r.positive("num_nodes", p.num_nodes, {"nodes"});
    p.base_density = r.probability("base_density", p.base_density);
    p.n_discriminative = r.positive("n_discriminative", p.n_discriminative);
    p.delta = r.probability("delta", p.delta);
    p.seed = r.uint("seed", default_seed);
    r.finish();
    validate(p, path);
    return p;
}

DatasetSpec builtin_dataset_spec(const std::string& name, const json& user_params,
                                 std::uint64_t default_seed, const std::string& path) {
    if (name == "tree-cycles") {
        auto p = tree_cycles_params(user_params, path, default_seed);
        return {name, to_json(p), std::nullopt, [p] { return generate_tree_cycles(p); }};
    }
    if (name == "fixed-node-two-class") {
        auto p = fixed_node_two_class_params(user_params, path, default_seed);
        return {name, to_json(p), std::nullopt, [p] { return generate_fixed_node_two_class(p); }};
    }
    throw ConfigError(fmt::format("unknown dataset '{}'; known: tree-cycles, fixed-node-two-class",
                                  name));
}

fs::path default_dataset_path(const DatasetSpec& spec, const fs::path& data_dir) {
    return data_dir / spec.name / (params_hash(spec.params) + ".jsonl");
}

Dataset ensure_dataset(const DatasetSpec& spec, const fs::path& data_dir, RunLog& log) {
    const fs::path path = spec.path ? *spec.path : default_dataset_path(spec, data_dir);
    if (fs::exists(path)) {
        Dataset d = load(path);
        if (d.generation_params() != spec.params)
            throw ConfigError(fmt::format(
                "dataset file {} was generated with different params: stored {} vs requested {}",
                path.string(), d.generation_params().dump(), spec.params.dump()));
        log.info(fmt::format("dataset '{}' loaded from {}", spec.name, path.string()));
        return d;
    }
    if (!spec.generate)
        throw ConfigError(fmt::format("dataset '{}' has no generator and {} does not exist",
                                      spec.name, path.string()));
    Dataset d = spec.generate();
    save(d, path);
    log.info(fmt::format("dataset '{}' generated and saved to {}", spec.name, path.string()));
    return d;
}

}  // namespace cfbench
