#include "cfbench/explainer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include <fmt/format.h>

#include "cfbench/error.hpp"
#include "cfbench/params.hpp"

namespace cfbench {

using nlohmann::json;

namespace {

// Fills calls and wall time of an explanation from the handle delta and the
// elapsed time since construction.
class ExplainScope {
public:
    explicit ExplainScope(OracleHandle& o)
        : oracle_(o), start_calls_(o.calls()), start_(std::chrono::steady_clock::now()) {}

    Explanation finish(Explanation e) const {
        e.oracle_calls = oracle_.calls() - start_calls_;
        e.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        return e;
    }

private:
    OracleHandle& oracle_;
    std::uint64_t start_calls_;
    std::chrono::steady_clock::time_point start_;
};

Explanation not_found(const GraphInstance& g) {
    return Explanation{g.id(), g, false, 0, 0.0, {}, {}};
}

// Forward phase shared by OBS and DBS: flip slots in the order produced by
// next_slot until the predicted class leaves original_class.
template <class NextSlot>
std::optional<BackwardResult> forward_search(const GraphInstance& g, ClassLabel original_class,
                                             OracleHandle& o, std::size_t limit,
                                             NextSlot&& next_slot) {
    GraphInstance current = g;
    std::vector<Edge> edits;
    for (std::size_t i = 0; i < limit; ++i) {
        const Edge e = slot_to_edge(next_slot(i), g.num_nodes());
        current = flip_edge(current, e.u, e.v);
        edits.push_back(e);
        if (o.predict(current) != original_class) return BackwardResult{current, edits};
    }
    return std::nullopt;
}

Explanation bidirectional_result(const GraphInstance& g, OracleHandle& o, BackwardResult fwd,
                                 ClassLabel original_class, Rng& rng, const SearchBudget& budget,
                                 const RevertObserver& observer) {
    BackwardResult back = backward_pass(std::move(fwd.graph), original_class, std::move(fwd.edits),
                                        o, rng, budget.max_backward_passes, observer);
    GraphInstance cf = back.graph.with_label(1 - original_class);
    return Explanation{g.id(), std::move(cf), true, 0, 0.0, std::move(back.edits), {}};
}

}  // namespace

std::size_t SearchBudget::forward_limit(std::size_t num_nodes) const {
    const std::size_t slots = slot_count(num_nodes);
    return max_forward_flips ? std::min(*max_forward_flips, slots) : slots;
}

Explanation explain_dce(const GraphInstance& g, OracleHandle& o, const Dataset& d) {
    ExplainScope scope(o);
    const ClassLabel original_class = o.predict(g);
    const GraphInstance* best = nullptr;
    ClassLabel best_class = 0;
    std::size_t best_ged = 0;
    for (const auto& candidate : d.instances()) {
        const ClassLabel c = o.predict(candidate);
        if (c == original_class) continue;
        const std::size_t dist = ged(g, candidate);
        if (!best || dist < best_ged) {
            best = &candidate;
            best_ged = dist;
            best_class = c;
        }
    }
    if (!best) return scope.finish(not_found(g));
    return scope.finish(Explanation{g.id(), best->with_label(best_class), true, 0, 0.0, {}, {}});
}

BackwardResult backward_pass(GraphInstance current, ClassLabel original_class,
                             std::vector<Edge> edits, OracleHandle& o, Rng& rng,
                             std::size_t max_passes, const RevertObserver& observer) {
    for (std::size_t pass = 0; pass < max_passes && !edits.empty(); ++pass) {
        std::vector<Edge> order = edits;
        rng.shuffle(std::span<Edge>(order));
        std::size_t kept = 0;
        for (const Edge& e : order) {
            bool keep = false;
            if (edits.size() > 1) {
                GraphInstance candidate = flip_edge(current, e.u, e.v);
                if (o.predict(candidate) != original_class) {
                    current = std::move(candidate);
                    edits.erase(std::find(edits.begin(), edits.end(), e));
                    keep = true;
                    ++kept;
                }
            }
            if (observer) observer(RevertStep{e, keep, current});
        }
        if (kept == 0) break;
    }
    return BackwardResult{std::move(current), std::move(edits)};
}

Explanation explain_obs(const GraphInstance& g, OracleHandle& o, const SearchBudget& budget,
                        const RevertObserver& observer) {
    ExplainScope scope(o);
    if (g.num_nodes() < 2)
        throw ValidationError(fmt::format("obs: instance {} has fewer than 2 nodes", g.id()));
    Rng rng(budget.rng_seed);
    const ClassLabel original_class = o.predict(g);

    // Lazy Fisher-Yates over all slots: each draw is uniform among unflipped slots.
    std::vector<std::size_t> slots(slot_count(g.num_nodes()));
    std::iota(slots.begin(), slots.end(), 0);
    auto next_slot = [&](std::size_t i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(i, slots.size() - 1));
        std::swap(slots[i], slots[j]);
        return slots[i];
    };
    auto fwd = forward_search(g, original_class, o, budget.forward_limit(g.num_nodes()), next_slot);
    if (!fwd) return scope.finish(not_found(g));
    return scope.finish(bidirectional_result(g, o, std::move(*fwd), original_class, rng, budget, observer));
}

Explanation explain_dbs(const GraphInstance& g, OracleHandle& o, const EdgeProbabilityTable& table,
                        const SearchBudget& budget, const RevertObserver& observer) {
    ExplainScope scope(o);
    if (g.num_nodes() != table.num_nodes())
        throw ValidationError(fmt::format("dbs: instance {} has {} nodes, edge table has {}", g.id(),
                                          g.num_nodes(), table.num_nodes()));
    if (g.num_nodes() < 2)
        throw ValidationError(fmt::format("dbs: instance {} has fewer than 2 nodes", g.id()));
    Rng rng(budget.rng_seed);
    const ClassLabel original_class = o.predict(g);
    const ClassLabel target = 1 - original_class;

    const std::size_t n = g.num_nodes();
    Eigen::ArrayXd present = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(table.num_slots()));
    for (const Edge& e : g.edges()) present[static_cast<Eigen::Index>(edge_to_slot(e, n))] = 1.0;
    const Eigen::ArrayXd score = (present - table.of_class(target)).abs();

    std::vector<std::size_t> order(table.num_slots());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return score[static_cast<Eigen::Index>(a)] > score[static_cast<Eigen::Index>(b)];
    });
    auto next_slot = [&](std::size_t i) { return order[i]; };
    auto fwd = forward_search(g, original_class, o, budget.forward_limit(n), next_slot);
    if (!fwd) return scope.finish(not_found(g));
    return scope.finish(bidirectional_result(g, o, std::move(*fwd), original_class, rng, budget, observer));
}

Explanation DceExplainer::explain(const GraphInstance& g, OracleHandle& o, std::uint64_t) const {
    if (!dataset_) throw Error("dce: prepare() was not called");
    return explain_dce(g, o, *dataset_);
}

Explanation ObsExplainer::explain(const GraphInstance& g, OracleHandle& o,
                                  std::uint64_t seed) const {
    SearchBudget b = budget_;
    b.rng_seed = seed;
    return explain_obs(g, o, b);
}

void DbsExplainer::prepare(std::shared_ptr<const Dataset> d) { table_.emplace(edge_probabilities(*d)); }

Explanation DbsExplainer::explain(const GraphInstance& g, OracleHandle& o,
                                  std::uint64_t seed) const {
    if (!table_) throw Error("dbs: prepare() was not called");
    SearchBudget b = budget_;
    b.rng_seed = seed;
    return explain_dbs(g, o, *table_, b);
}

SearchBudget search_budget_from_json(const json& params, const std::string& path) {
    ParamReader r(params, path);
    SearchBudget b;
    b.max_forward_flips = r.optional_positive("max_forward_flips");
    b.max_backward_passes = r.positive("max_backward_passes", b.max_backward_passes);
    r.finish();
    return b;
}

std::unique_ptr<Explainer> make_builtin_explainer(const std::string& name, const json& params,
                                                  const std::string& path) {
    if (name == "dce") {
        ParamReader(params, path).finish();
        return std::make_unique<DceExplainer>();
    }
    if (name == "obs") return std::make_unique<ObsExplainer>(search_budget_from_json(params, path));
    if (name == "dbs") return std::make_unique<DbsExplainer>(search_budget_from_json(params, path));
    throw ConfigError(fmt::format("unknown component '{}'; known: dce, obs, dbs", name));
}

}  // namespace cfbench
