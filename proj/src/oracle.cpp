#include "cfbench/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cfbench/error.hpp"
#include "cfbench/fs_util.hpp"
#include "cfbench/params.hpp"

namespace cfbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t triangle_count(const GraphInstance& g) {
    // Bitset rows; each triangle u < v < w is counted once, from its lowest edge {u,v}.
    const std::size_t n = g.num_nodes();
    const std::size_t words = (n + 63) / 64;
    std::vector<std::uint64_t> rows(n * words, 0);
    for (const Edge& e : g.edges()) {
        rows[e.u * words + e.v / 64] |= std::uint64_t{1} << (e.v % 64);
        rows[e.v * words + e.u / 64] |= std::uint64_t{1} << (e.u % 64);
    }
    std::size_t count = 0;
    for (const Edge& e : g.edges()) {
        const std::uint64_t* a = &rows[e.u * words];
        const std::uint64_t* b = &rows[e.v * words];
        std::size_t w = e.v / 64;
        const std::uint64_t above = (e.v % 64 == 63) ? 0 : ~std::uint64_t{0} << (e.v % 64 + 1);
        count += static_cast<std::size_t>(std::popcount(a[w] & b[w] & above));
        for (++w; w < words; ++w) count += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
    }
    return count;
}

namespace {

std::size_t component_count(const GraphInstance& g) {
    std::vector<NodeIndex> parent(g.num_nodes());
    std::iota(parent.begin(), parent.end(), NodeIndex{0});
    auto find = [&](NodeIndex x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t count = g.num_nodes();
    for (const Edge& e : g.edges()) {
        const NodeIndex a = find(e.u), b = find(e.v);
        if (a != b) {
            parent[a] = b;
            --count;
        }
    }
    return count;
}

}  // namespace

FeatureVector embed(const GraphInstance& g) {
    const auto n = static_cast<double>(g.num_nodes());
    const auto m = static_cast<double>(g.num_edges());
    Eigen::ArrayXd degree = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(g.num_nodes()));
    for (const Edge& e : g.edges()) {
        degree[e.u] += 1.0;
        degree[e.v] += 1.0;
    }
    const double mean_degree = degree.mean();
    const double degree_variance = (degree - mean_degree).square().mean();
    // A forest has exactly n - components edges.
    const std::size_t components = component_count(g);
    const bool cyclic = g.num_edges() > g.num_nodes() - components;

    FeatureVector f;
    f << n, m, mean_degree, degree_variance, static_cast<double>(triangle_count(g)),
        static_cast<double>(components), cyclic ? 1.0 : 0.0;
    return f;
}

namespace {

json vector_json(const FeatureVector& v) {
    json arr = json::array();
    for (int i = 0; i < kFeatureCount; ++i) arr.push_back(v[i]);
    return arr;
}

FeatureVector vector_from_json(const json& j, const char* field) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(kFeatureCount))
        throw Error(fmt::format("model field '{}' must be an array of {} numbers", field,
                                kFeatureCount));
    FeatureVector v;
    for (int i = 0; i < kFeatureCount; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number())
            throw Error(fmt::format("model field '{}' must hold numbers", field));
        v[i] = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

void require_both_classes(const Dataset& d) {
    const auto counts = d.class_counts();
    if (counts[0] == 0 || counts[1] == 0)
        throw ValidationError(fmt::format("dataset '{}': single-class dataset", d.name()));
}

}  // namespace

NearestCentroid::NearestCentroid(FeatureVector mean, FeatureVector scale, FeatureVector centroid0,
                                 FeatureVector centroid1)
    : mean_(std::move(mean)),
      scale_(std::move(scale)),
      centroid0_(std::move(centroid0)),
      centroid1_(std::move(centroid1)) {
    if (!(mean_.allFinite() && scale_.allFinite() && centroid0_.allFinite() &&
          centroid1_.allFinite()) ||
        (scale_.array() < 0.0).any())
        throw ValidationError("nearest-centroid: non-finite or negative model parameters");
}

FeatureVector NearestCentroid::standardize(const FeatureVector& x) const {
    return ((scale_.array() > 0.0)
                .select((x - mean_).array() / scale_.array().max(1e-300), 0.0))
        .matrix();
}

ClassLabel NearestCentroid::classify(const GraphInstance& g) const {
    const FeatureVector z = standardize(embed(g));
    const double d0 = (z - centroid0_).squaredNorm();
    const double d1 = (z - centroid1_).squaredNorm();
    return d0 <= d1 ? 0 : 1;
}

json NearestCentroid::model_json() const {
    return {{"mean", vector_json(mean_)},
            {"scale", vector_json(scale_)},
            {"centroid0", vector_json(centroid0_)},
            {"centroid1", vector_json(centroid1_)}};
}

std::shared_ptr<const NearestCentroid> NearestCentroid::from_json(const json& j) {
    if (!j.is_object()) throw Error("nearest-centroid model must be an object");
    return std::make_shared<const NearestCentroid>(
        vector_from_json(j.at("mean"), "mean"), vector_from_json(j.at("scale"), "scale"),
        vector_from_json(j.at("centroid0"), "centroid0"),
        vector_from_json(j.at("centroid1"), "centroid1"));
}

std::shared_ptr<const NearestCentroid> fit_nearest_centroid(const Dataset& d) {
    require_both_classes(d);
    using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, kFeatureCount>;
    FeatureMatrix x(static_cast<Eigen::Index>(d.size()), kFeatureCount);
    for (std::size_t i = 0; i < d.size(); ++i)
        x.row(static_cast<Eigen::Index>(i)) = embed(d[i]).transpose();

    const FeatureVector mean = x.colwise().mean().transpose();
    const FeatureVector sd =
        ((x.rowwise() - mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
    // Zero-variance features carry no information and are ignored.
    const FeatureVector tolerance = 1e-12 * mean.array().abs().max(1.0);
    const FeatureVector scale = (sd.array() > tolerance.array()).select(sd, 0.0);

    NearestCentroid unscaled(mean, scale, FeatureVector::Zero(), FeatureVector::Zero());
    FeatureVector sum0 = FeatureVector::Zero();
    FeatureVector sum1 = FeatureVector::Zero();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const FeatureVector z = unscaled.standardize(x.row(static_cast<Eigen::Index>(i)).transpose());
        (d[i].label() == 0 ? sum0 : sum1) += z;
    }
    const auto counts = d.class_counts();
    return std::make_shared<const NearestCentroid>(mean, scale,
                                                   sum0 / static_cast<double>(counts[0]),
                                                   sum1 / static_cast<double>(counts[1]));
}

EdgeRule::EdgeRule(std::size_t num_nodes, std::vector<std::size_t> class0_slots,
                   std::vector<std::size_t> class1_slots)
    : num_nodes_(num_nodes), class0_(std::move(class0_slots)), class1_(std::move(class1_slots)) {
    const std::size_t slots = slot_count(num_nodes_);
    for (auto* set : {&class0_, &class1_}) {
        std::sort(set->begin(), set->end());
        if (std::adjacent_find(set->begin(), set->end()) != set->end())
            throw ValidationError("edge-rule: duplicate slot in rule set");
        if (!set->empty() && set->back() >= slots)
            throw ValidationError("edge-rule: slot index out of range");
    }
}

std::array<std::size_t, 2> EdgeRule::votes(const GraphInstance& g) const {
    std::array<std::size_t, 2> count{0, 0};
    for (const Edge& e : g.edges()) {
        if (e.v >= num_nodes_) continue;
        const std::size_t s = edge_to_slot(e, num_nodes_);
        if (std::binary_search(class0_.begin(), class0_.end(), s)) ++count[0];
        if (std::binary_search(class1_.begin(), class1_.end(), s)) ++count[1];
    }
    return count;
}

ClassLabel EdgeRule::classify(const GraphInstance& g) const {
    const auto v = votes(g);
    return v[0] >= v[1] ? 0 : 1;
}

json EdgeRule::model_json() const {
    return {{"num_nodes", num_nodes_}, {"class0_slots", class0_}, {"class1_slots", class1_}};
}

std::shared_ptr<const EdgeRule> EdgeRule::from_json(const json& j) {
    if (!j.is_object()) throw Error("edge-rule model must be an object");
    return std::make_shared<const EdgeRule>(j.at("num_nodes").get<std::size_t>(),
                                            j.at("class0_slots").get<std::vector<std::size_t>>(),
                                            j.at("class1_slots").get<std::vector<std::size_t>>());
}

std::shared_ptr<const EdgeRule> fit_edge_rule(const Dataset& d, std::size_t k) {
    require_both_classes(d);
    const EdgeProbabilityTable table = edge_probabilities(d);
    const std::size_t slots = table.num_slots();
    if (k == 0 || k > slots)
        throw ValidationError(fmt::format("edge-rule: k = {} outside [1, {}]", k, slots));

    const Eigen::ArrayXd toward0 = table.of_class(0) - table.of_class(1);
    auto top_k = [&](const Eigen::ArrayXd& score) {
        std::vector<std::size_t> idx(slots);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return score[static_cast<Eigen::Index>(a)] > score[static_cast<Eigen::Index>(b)];
        });
        idx.resize(k);
        return idx;
    };
    return std::make_shared<const EdgeRule>(table.num_nodes(), top_k(toward0), top_k(-toward0));
}

double training_accuracy(const Predictor& p, const Dataset& d) {
    std::size_t hits = 0;
    for (const auto& g : d.instances()) hits += p.classify(g) == g.label() ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(d.size());
}

OracleSpec builtin_oracle_spec(const std::string& name, const json& user_params,
                               const std::string& path) {
    if (name == "nearest-centroid") {
        ParamReader r(user_params, path);
        r.finish();
        return {name, json::object(),
                [](const Dataset& d) -> std::shared_ptr<const Predictor> {
                    return fit_nearest_centroid(d);
                },
                [](const json& j) -> std::shared_ptr<const Predictor> {
                    return NearestCentroid::from_json(j);
                }};
    }
    if (name == "edge-rule") {
        ParamReader r(user_params, path);
        const auto k = static_cast<std::size_t>(r.positive("k", kDefaultEdgeRuleK));
        r.finish();
        return {name, json{{"k", k}},
                [k](const Dataset& d) -> std::shared_ptr<const Predictor> {
                    return fit_edge_rule(d, k);
                },
                [](const json& j) -> std::shared_ptr<const Predictor> {
                    return EdgeRule::from_json(j);
                }};
    }
    throw ConfigError(
        fmt::format("unknown oracle '{}'; known: nearest-centroid, edge-rule", name));
}

fs::path oracle_cache_path(const OracleSpec& spec, const Dataset& d, const fs::path& model_dir) {
    return model_dir /
           fmt::format("{}-{}-{}.json", spec.name, params_hash(spec.params), hash_hex(content_hash(d)));
}

OracleHandle ensure_oracle(const OracleSpec& spec, const Dataset& d, const fs::path& model_dir,
                           RunLog& log) {
    const fs::path path = oracle_cache_path(spec, d, model_dir);
    const std::string dataset_hash = hash_hex(content_hash(d));
    if (fs::exists(path)) {
        try {
            const json j = json::parse(read_file(path));
            if (j.at("oracle") != spec.name || j.at("params") != spec.params ||
                j.at("dataset_hash") != dataset_hash)
                throw Error("cache key does not match");
            auto predictor = spec.load(j.at("model"));
            log.info(fmt::format("oracle '{}' loaded from {}", spec.name, path.string()));
            return OracleHandle(spec.name, std::move(predictor));
        } catch (const std::exception& e) {
            log.warn(fmt::format("corrupt model file {} ({}); re-fitting", path.string(), e.what()));
        }
    }
    auto predictor = spec.fit(d);
    const json file = {{"oracle", spec.name},
                       {"params", spec.params},
                       {"dataset_hash", dataset_hash},
                       {"model", predictor->model_json()}};
    write_file_atomic(path, file.dump(2) + "\n");
    log.info(fmt::format("oracle '{}' fitted and saved to {}", spec.name, path.string()));
    return OracleHandle(spec.name, std::move(predictor));
}

}  // namespace cfbench
