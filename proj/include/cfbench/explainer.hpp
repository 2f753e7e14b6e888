#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfbench/dataset.hpp"
#include "cfbench/graph.hpp"
#include "cfbench/oracle.hpp"
#include "cfbench/rng.hpp"

namespace cfbench {

struct Explanation {
    std::uint64_t original_id = 0;
    // G'. When found, its label is the oracle's class for G'; otherwise it is G unchanged.
    GraphInstance counterfactual;
    bool found = false;
    std::uint64_t oracle_calls = 0;
    double wall_time_s = 0.0;
    // Flips that turn G into G', in the order they were applied. Empty for DCE.
    std::vector<Edge> edit_trace;
    // Set when the explainer failed on this instance.
    std::string error;
};

struct SearchBudget {
    // Defaults to every edge slot of the instance.
    std::optional<std::size_t> max_forward_flips;
    std::size_t max_backward_passes = 5;
    std::uint64_t rng_seed = 0;

    std::size_t forward_limit(std::size_t num_nodes) const;
};

struct RevertStep {
    Edge edge;
    bool kept;
    // Graph after the step (reverted if kept, unchanged otherwise).
    const GraphInstance& graph;
};

using RevertObserver = std::function<void(const RevertStep&)>;

// Nearest opposite-predicted instance of d by ged; ties go to the smallest id.
// Costs exactly 1 + |d| oracle calls.
Explanation explain_dce(const GraphInstance& g, OracleHandle& o, const Dataset& d);

// Random-order forward flips until the class changes, then backward_pass.
Explanation explain_obs(const GraphInstance& g, OracleHandle& o, const SearchBudget& budget,
                        const RevertObserver& observer = {});

// Forward flips ordered by |presence - p_target|, descending, ties by slot.
Explanation explain_dbs(const GraphInstance& g, OracleHandle& o, const EdgeProbabilityTable& table,
                        const SearchBudget& budget,
                        const RevertObserver& observer = {});

struct BackwardResult {
    GraphInstance graph;
    std::vector<Edge> edits;
};

// Tries to undo each edit in random order, keeping an undo whenever the class
// stays away from original_class. Passes repeat until one keeps nothing or
// max_passes is reached. Undoing the last remaining edit would restore G,
// whose class is known, so it is rejected without a query.
BackwardResult backward_pass(GraphInstance current, ClassLabel original_class,
                             std::vector<Edge> edits, OracleHandle& o, Rng& rng,
                             std::size_t max_passes = 5, const RevertObserver& observer = {});

// Explain contract used by the harness. Implementations are immutable after
// prepare() and may be shared by concurrent tasks.
class Explainer {
public:
    virtual ~Explainer() = default;

    virtual std::string name() const = 0;

    // Derive dataset-dependent state (DCE keeps the dataset, DBS its edge table).
    virtual void prepare(std::shared_ptr<const Dataset> d) { (void)d; }

    virtual Explanation explain(const GraphInstance& g, OracleHandle& o,
                                std::uint64_t seed) const = 0;
};

class DceExplainer final : public Explainer {
public:
    std::string name() const override { return "dce"; }
    void prepare(std::shared_ptr<const Dataset> d) override { dataset_ = std::move(d); }
    Explanation explain(const GraphInstance& g, OracleHandle& o, std::uint64_t seed) const override;

private:
    std::shared_ptr<const Dataset> dataset_;
};

class ObsExplainer final : public Explainer {
public:
    explicit ObsExplainer(SearchBudget budget = {}) : budget_(budget) {}
    std::string name() const override { return "obs"; }
    Explanation explain(const GraphInstance& g, OracleHandle& o, std::uint64_t seed) const override;

private:
    SearchBudget budget_;
};

class DbsExplainer final : public Explainer {
public:
    explicit DbsExplainer(SearchBudget budget = {}) : budget_(budget) {}
    std::string name() const override { return "dbs"; }
    void prepare(std::shared_ptr<const Dataset> d) override;
    Explanation explain(const GraphInstance& g, OracleHandle& o, std::uint64_t seed) const override;

private:
    SearchBudget budget_;
    std::optional<EdgeProbabilityTable> table_;
};

// Strict params: max_forward_flips, max_backward_passes.
SearchBudget search_budget_from_json(const nlohmann::json& params, const std::string& path);

std::unique_ptr<Explainer> make_builtin_explainer(const std::string& name,
                                                  const nlohmann::json& params,
                                                  const std::string& path = "explainer.params");

}  // namespace cfbench
