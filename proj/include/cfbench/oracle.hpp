#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "cfbench/dataset.hpp"
#include "cfbench/graph.hpp"
#include "cfbench/run_log.hpp"

namespace cfbench {

inline constexpr int kFeatureCount = 7;

template <class Scalar>
using FeatureVectorT = Eigen::Matrix<Scalar, kFeatureCount, 1>;

// [num_nodes, num_edges, mean degree, degree variance, triangles,
//  connected components, has_cycle]
using FeatureVector = FeatureVectorT<double>;

FeatureVector embed(const GraphInstance& g);

std::size_t triangle_count(const GraphInstance& g);

// Fitted decision function. Implementations are immutable after fitting and
// safe to share across threads.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual ClassLabel classify(const GraphInstance& g) const = 0;

    // Name of the oracle family, e.g. "nearest-centroid".
    virtual std::string kind() const = 0;

    // Model parameters as stored in the cache file.
    virtual nlohmann::json model_json() const = 0;
};

// Counting view over a shared predictor. Every predict() is one oracle call.
// Not for concurrent use: each explanation owns its handle.
class OracleHandle {
public:
    OracleHandle(std::string name, std::shared_ptr<const Predictor> predictor)
        : name_(std::move(name)), predictor_(std::move(predictor)) {}

    ClassLabel predict(const GraphInstance& g) {
        ++calls_;
        return predictor_->classify(g);
    }

    std::uint64_t calls() const { return calls_; }
    void reset_calls() { calls_ = 0; }

    const std::string& name() const { return name_; }
    const std::shared_ptr<const Predictor>& predictor() const { return predictor_; }

    // Fresh handle on the same predictor with its own zeroed counter.
    OracleHandle fork() const { return OracleHandle(name_, predictor_); }

private:
    std::string name_;
    std::shared_ptr<const Predictor> predictor_;
    std::uint64_t calls_ = 0;
};

// Standardized nearest-centroid classifier over embed() features.
class NearestCentroid final : public Predictor {
public:
    NearestCentroid(FeatureVector mean, FeatureVector scale, FeatureVector centroid0,
                    FeatureVector centroid1);

    ClassLabel classify(const GraphInstance& g) const override;
    std::string kind() const override { return "nearest-centroid"; }
    nlohmann::json model_json() const override;

    static std::shared_ptr<const NearestCentroid> from_json(const nlohmann::json& j);

    // Standardized features; ignored (zero-variance) features map to 0.
    FeatureVector standardize(const FeatureVector& x) const;

    const FeatureVector& mean() const { return mean_; }
    const FeatureVector& scale() const { return scale_; }
    const FeatureVector& centroid(ClassLabel c) const { return c == 0 ? centroid0_ : centroid1_; }

private:
    FeatureVector mean_;
    FeatureVector scale_;  // 0 marks an ignored feature
    FeatureVector centroid0_;
    FeatureVector centroid1_;
};

std::shared_ptr<const NearestCentroid> fit_nearest_centroid(const Dataset& d);

// Vote between two discriminative edge sets: class 0 unless more edges of g
// fall in the class-1 set than in the class-0 set.
class EdgeRule final : public Predictor {
public:
    EdgeRule(std::size_t num_nodes, std::vector<std::size_t> class0_slots,
             std::vector<std::size_t> class1_slots);

    ClassLabel classify(const GraphInstance& g) const override;
    std::string kind() const override { return "edge-rule"; }
    nlohmann::json model_json() const override;

    static std::shared_ptr<const EdgeRule> from_json(const nlohmann::json& j);

    std::size_t num_nodes() const { return num_nodes_; }
    // Sorted slot indices.
    const std::vector<std::size_t>& class_slots(ClassLabel c) const {
        return c == 0 ? class0_ : class1_;
    }

    // Present edges of g counted in each set.
    std::array<std::size_t, 2> votes(const GraphInstance& g) const;

private:
    std::size_t num_nodes_;
    std::vector<std::size_t> class0_;
    std::vector<std::size_t> class1_;
};

inline constexpr std::size_t kDefaultEdgeRuleK = 10;

std::shared_ptr<const EdgeRule> fit_edge_rule(const Dataset& d, std::size_t k = kDefaultEdgeRuleK);

// Fraction of instances whose predicted class equals the ground-truth label.
// Uses the predictor directly, without counting calls.
double training_accuracy(const Predictor& p, const Dataset& d);

// How to fit and reload one oracle family with fixed params.
struct OracleSpec {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
    std::function<std::shared_ptr<const Predictor>(const Dataset&)> fit;
    std::function<std::shared_ptr<const Predictor>(const nlohmann::json&)> load;
};

OracleSpec builtin_oracle_spec(const std::string& name, const nlohmann::json& user_params,
                               const std::string& path = "oracle.params");

std::filesystem::path oracle_cache_path(const OracleSpec& spec, const Dataset& d,
                                        const std::filesystem::path& model_dir);

// Loads the cached model keyed by (name, params hash, dataset content hash)
// or fits and saves it. A corrupt cache file is re-fitted with a warning.
OracleHandle ensure_oracle(const OracleSpec& spec, const Dataset& d,
                           const std::filesystem::path& model_dir, RunLog& log);

}  // namespace cfbench
