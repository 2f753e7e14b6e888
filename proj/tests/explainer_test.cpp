#include "cfbench/explainer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>

#include "cfbench/error.hpp"
#include "test_support.hpp"

namespace cfbench {
namespace {

using testing::function_oracle;
using testing::make_graph;
using testing::path_graph;
using testing::random_graph;

// Exhaustive reference for DCE: classify everything up front, then scan for
// the opposite-class instance with the smallest distance, smallest id first.
std::optional<std::uint64_t> brute_force_dce(const GraphInstance& g, const Predictor& p,
                                             const Dataset& d) {
    const ClassLabel c = p.classify(g);
    std::vector<std::uint64_t> ids;
    for (const auto& x : d.instances())
        if (p.classify(x) != c) ids.push_back(x.id());
    if (ids.empty()) return std::nullopt;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::uint64_t best_id = 0;
    for (auto id : ids) {
        const std::size_t dist = ged(g, d[id]);
        if (dist < best || (dist == best && id < best_id)) {
            best = dist;
            best_id = id;
        }
    }
    return best_id;
}

TEST(DceTest, CallsAreDatasetSizePlusOne) {
    Dataset d = generate_tree_cycles({40, 15, 2, 3});
    OracleHandle o("nc", fit_nearest_centroid(d));
    for (const auto& g : d.instances()) {
        const auto before = o.calls();
        Explanation e = explain_dce(g, o, d);
        EXPECT_EQ(e.oracle_calls, 41u);
        EXPECT_EQ(o.calls() - before, 41u);
        EXPECT_TRUE(e.edit_trace.empty());
    }
}

TEST(DceTest, ConstantOracleFindsNothing) {
    Dataset d = generate_tree_cycles({20, 10, 2, 3});
    OracleHandle o = function_oracle([](const GraphInstance&) { return 1; });
    Explanation e = explain_dce(d[4], o, d);
    EXPECT_FALSE(e.found);
    EXPECT_EQ(e.counterfactual, d[4]);
    EXPECT_EQ(ged(e.counterfactual, d[4]), 0u);
    EXPECT_EQ(e.oracle_calls, 21u);
}

TEST(DceTest, MatchesExhaustiveArgmin) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        Rng rng(seed);
        const std::size_t n = 8 + rng.uniform_int(0, 22);
        Dataset d = seed % 2 == 0
                        ? generate_tree_cycles({n, 6 + rng.uniform_int(0, 6), 2, seed + 100})
                        : generate_fixed_node_two_class({n, 8, 0.3, 6, 0.25, seed + 100});
        auto p = seed % 2 == 0 ? std::shared_ptr<const Predictor>(fit_nearest_centroid(d))
                               : std::shared_ptr<const Predictor>(fit_edge_rule(d, 4));
        OracleHandle o("o", p);
        for (const auto& g : d.instances()) {
            Explanation e = explain_dce(g, o, d);
            auto expected = brute_force_dce(g, *p, d);
            ASSERT_EQ(e.found, expected.has_value());
            if (expected) {
                EXPECT_EQ(e.counterfactual.id(), *expected);
                EXPECT_EQ(e.counterfactual.label(), p->classify(e.counterfactual));
                EXPECT_NE(p->classify(e.counterfactual), p->classify(g));
            }
        }
    }
}

TEST(ObsTest, CycleOracleOnTreeEndsNearBoundary) {
    OracleHandle o = function_oracle([](const GraphInstance& g) { return has_cycle(g) ? 1 : 0; });
    Rng rng(5);
    int ged_one = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto tree = make_random_tree(0, 12, rng);
        Explanation e = explain_obs(tree, o, SearchBudget{std::nullopt, 5, seed});
        ASSERT_TRUE(e.found);
        EXPECT_EQ(o.predictor()->classify(e.counterfactual), 1);
        EXPECT_EQ(e.counterfactual.label(), 1);
        const std::size_t d = ged(tree, e.counterfactual);
        EXPECT_EQ(d, e.edit_trace.size());
        ged_one += d == 1 ? 1 : 0;
        // Every remaining edit is needed to keep a cycle.
        if (e.edit_trace.size() > 1) {
            for (const Edge& x : e.edit_trace)
                EXPECT_EQ(o.predictor()->classify(flip_edge(e.counterfactual, x.u, x.v)), 0);
        }
    }
    EXPECT_GE(ged_one, 30);
}

TEST(ObsTest, SingleFlipRunCostsTwoCalls) {
    auto g = path_graph(6);
    const std::size_t m = g.num_edges();
    OracleHandle o = function_oracle([m](const GraphInstance& h) { return h.num_edges() == m ? 0 : 1; });
    Explanation e = explain_obs(g, o, SearchBudget{std::nullopt, 5, 3});
    EXPECT_TRUE(e.found);
    EXPECT_EQ(ged(g, e.counterfactual), 1u);
    EXPECT_EQ(e.oracle_calls, 2u);
}

TEST(ObsTest, BudgetExhaustion) {
    auto g = path_graph(5);
    OracleHandle o = function_oracle([](const GraphInstance&) { return 0; });
    Explanation e = explain_obs(g, o, SearchBudget{1, 5, 0});
    EXPECT_FALSE(e.found);
    EXPECT_EQ(e.counterfactual, g);
    EXPECT_TRUE(e.edit_trace.empty());
    EXPECT_EQ(e.oracle_calls, 2u);

    Explanation full = explain_obs(g, o, SearchBudget{});
    EXPECT_FALSE(full.found);
    EXPECT_EQ(full.oracle_calls, 1u + slot_count(5));
}

TEST(ObsTest, FaithfulToLabelOfG) {
    // A found=false result keeps G's ground-truth label.
    auto g = path_graph(4, 1, 7);
    OracleHandle o = function_oracle([](const GraphInstance&) { return 0; });
    Explanation e = explain_obs(g, o, SearchBudget{2, 5, 0});
    EXPECT_EQ(e.counterfactual.label(), 1);
    EXPECT_EQ(e.original_id, 7u);
}

TEST(ObsTest, RejectsSingleNodeGraph) {
    OracleHandle o = function_oracle([](const GraphInstance&) { return 0; });
    EXPECT_THROW(explain_obs(make_graph(1, {}), o, SearchBudget{}), ValidationError);
}

TEST(ObsTest, ReproducibleForFixedSeed) {
    Dataset d = generate_fixed_node_two_class({60, 12, 0.3, 8, 0.25, 2});
    OracleHandle o("er", fit_edge_rule(d, 5));
    for (const auto& g : d.instances()) {
        Explanation a = explain_obs(g, o, SearchBudget{std::nullopt, 5, 99});
        Explanation b = explain_obs(g, o, SearchBudget{std::nullopt, 5, 99});
        EXPECT_EQ(a.counterfactual, b.counterfactual);
        EXPECT_EQ(a.edit_trace, b.edit_trace);
        EXPECT_EQ(a.oracle_calls, b.oracle_calls);
        EXPECT_EQ(a.found, b.found);
    }
}

TEST(DbsTest, FlipsHighestScoringSlotFirst) {
    const std::size_t n = 5;
    Eigen::ArrayXd p0 = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(slot_count(n)), 0.2);
    Eigen::ArrayXd p1 = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(slot_count(n)), 0.3);
    p1[static_cast<Eigen::Index>(edge_to_slot(Edge(2, 4), n))] = 1.0;
    EdgeProbabilityTable table(n, p0, p1);
    auto g = path_graph(n);  // lacks {2,4}
    OracleHandle o = function_oracle([](const GraphInstance& h) { return h.has_edge(2, 4) ? 1 : 0; });
    Explanation e = explain_dbs(g, o, table, SearchBudget{});
    ASSERT_TRUE(e.found);
    ASSERT_EQ(e.edit_trace.size(), 1u);
    EXPECT_EQ(e.edit_trace[0], Edge(2, 4));
    EXPECT_EQ(e.oracle_calls, 2u);
}

TEST(DbsTest, UniformTableFallsBackToLexicographicOrder) {
    const std::size_t n = 6;
    const auto slots = static_cast<Eigen::Index>(slot_count(n));
    EdgeProbabilityTable table(n, Eigen::ArrayXd::Constant(slots, 0.5), Eigen::ArrayXd::Constant(slots, 0.5));
    auto g = make_graph(n, {{0, 2}, {3, 5}});
    OracleHandle o = function_oracle([g](const GraphInstance& h) { return ged(g, h) >= 3 ? 1 : 0; });
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Explanation e = explain_dbs(g, o, table, SearchBudget{std::nullopt, 5, seed});
        ASSERT_TRUE(e.found);
        EXPECT_EQ(e.edit_trace, (std::vector<Edge>{Edge(0, 1), Edge(0, 2), Edge(0, 3)}));
        // 1 initial + 3 forward + 3 rejected reverts.
        EXPECT_EQ(e.oracle_calls, 7u);
    }
}

TEST(DbsTest, NodeCountMismatchRejected) {
    const auto slots = static_cast<Eigen::Index>(slot_count(4));
    EdgeProbabilityTable table(4, Eigen::ArrayXd::Zero(slots), Eigen::ArrayXd::Zero(slots));
    OracleHandle o = function_oracle([](const GraphInstance&) { return 0; });
    EXPECT_THROW(explain_dbs(path_graph(5), o, table, SearchBudget{}), ValidationError);
}

// Number of rule edits a locally minimal counterfactual needs under the vote:
// from class 0 the class-1 vote must end one ahead, from class 1 the votes end tied.
std::size_t minimal_vote_edits(const EdgeRule& rule, const GraphInstance& g) {
    const auto v = rule.votes(g);
    return rule.classify(g) == 0 ? v[0] - v[1] + 1 : v[1] - v[0];
}

TEST(DbsTest, PlantedDatasetMatchesVoteSimulation) {
    const std::size_t k = 8;
    Dataset d = generate_fixed_node_two_class({80, 14, 0.3, k, 0.25, 6});
    auto rule = fit_edge_rule(d, k);
    const EdgeProbabilityTable table = edge_probabilities(d);
    std::size_t converged = 0;
    for (const auto& g : d.instances()) {
        std::size_t max_forward = 0;
        OracleHandle o = function_oracle([&](const GraphInstance& h) {
            max_forward = std::max(max_forward, ged(g, h));
            return rule->classify(h);
        });
        Explanation e = explain_dbs(g, o, table, SearchBudget{std::nullopt, 5, g.id()});
        ASSERT_TRUE(e.found);
        EXPECT_NE(rule->classify(e.counterfactual), rule->classify(g));

        // Replay the forward order on the vote counts directly.
        const ClassLabel target = 1 - rule->classify(g);
        std::vector<std::size_t> order(table.num_slots());
        std::iota(order.begin(), order.end(), 0);
        auto score = [&](std::size_t s) {
            const Edge x = slot_to_edge(s, 14);
            return std::abs((g.has_edge(x.u, x.v) ? 1.0 : 0.0) -
                            table.of_class(target)[static_cast<Eigen::Index>(s)]);
        };
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
        auto votes = rule->votes(g);
        std::size_t steps = 0;
        for (std::size_t s : order) {
            ++steps;
            const Edge x = slot_to_edge(s, 14);
            const bool removing = g.has_edge(x.u, x.v);
            for (ClassLabel c : {0, 1}) {
                const auto& set = rule->class_slots(c);
                if (std::binary_search(set.begin(), set.end(), s)) {
                    auto& count = votes[static_cast<std::size_t>(c)];
                    count = removing ? count - 1 : count + 1;
                }
            }
            if ((votes[0] >= votes[1] ? 0 : 1) == target) break;
        }
        EXPECT_EQ(max_forward, steps);

        bool local_min = true;
        if (e.edit_trace.size() > 1)
            for (const Edge& x : e.edit_trace)
                if (rule->classify(flip_edge(e.counterfactual, x.u, x.v)) == target) local_min = false;
        if (local_min) {
            ++converged;
            EXPECT_EQ(e.edit_trace.size(), minimal_vote_edits(*rule, g));
        }
        EXPECT_LE(e.edit_trace.size(), k + 1);
    }
    EXPECT_GE(converged, 75u);
}

TEST(BackwardPassTest, NoEditsIsIdentity) {
    auto g = path_graph(4);
    OracleHandle o = function_oracle([](const GraphInstance&) { return 1; });
    Rng rng(1);
    auto r = backward_pass(g, 0, {}, o, rng);
    EXPECT_EQ(r.graph, g);
    EXPECT_TRUE(r.edits.empty());
    EXPECT_EQ(o.calls(), 0u);
}

TEST(BackwardPassTest, KeepsEverythingAtLocalOptimum) {
    auto g = make_graph(5, {});
    // Class 1 only with all three edges present.
    OracleHandle o = function_oracle([](const GraphInstance& h) { return h.num_edges() >= 3 ? 1 : 0; });
    std::vector<Edge> edits{Edge(0, 1), Edge(1, 2), Edge(3, 4)};
    GraphInstance current = make_graph(5, {{0, 1}, {1, 2}, {3, 4}});
    Rng rng(4);
    auto r = backward_pass(current, 0, edits, o, rng);
    EXPECT_EQ(r.graph, current);
    EXPECT_EQ(r.edits, edits);
}

TEST(BackwardPassTest, IgnoredSlotIsAlwaysReverted) {
    OracleHandle o = function_oracle([](const GraphInstance& h) { return h.has_edge(0, 1) ? 1 : 0; });
    GraphInstance current = make_graph(4, {{0, 1}, {2, 3}, {1, 3}});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto r = backward_pass(current, 0, {Edge(2, 3), Edge(0, 1), Edge(1, 3)}, o, rng);
        EXPECT_EQ(r.edits, std::vector<Edge>{Edge(0, 1)});
        EXPECT_EQ(r.graph, make_graph(4, {{0, 1}}));
    }
}

TEST(BackwardPassPropertyTest, GedNeverIncreases) {
    Dataset d = generate_fixed_node_two_class({60, 12, 0.3, 8, 0.25, 11});
    OracleHandle o("er", fit_edge_rule(d, 6));
    for (const auto& g : d.instances()) {
        const ClassLabel original = o.predictor()->classify(g);
        std::size_t last = std::numeric_limits<std::size_t>::max();
        std::size_t forward_ged = 0;
        bool first = true;
        Explanation e = explain_obs(g, o, SearchBudget{std::nullopt, 5, g.id()},
                                    [&](const RevertStep& step) {
                                        const std::size_t now = ged(g, step.graph);
                                        if (first) {
                                            forward_ged = now + (step.kept ? 1 : 0);
                                            last = forward_ged;
                                            first = false;
                                        }
                                        EXPECT_EQ(now, step.kept ? last - 1 : last);
                                        EXPECT_NE(o.predictor()->classify(step.graph), original);
                                        last = now;
                                    });
        if (e.found && !first) EXPECT_LE(e.edit_trace.size(), forward_ged);
    }
}

TEST(ExplainerInvariantTest, FoundImpliesFlipAndCallsMatchHandle) {
    Dataset d = generate_tree_cycles({30, 16, 2, 13});
    auto p = fit_nearest_centroid(d);
    auto shared = std::make_shared<const Dataset>(d);
    std::vector<std::unique_ptr<Explainer>> xs;
    xs.push_back(make_builtin_explainer("dce", nlohmann::json::object()));
    xs.push_back(make_builtin_explainer("obs", {{"max_forward_flips", 40}}));
    xs.push_back(make_builtin_explainer("dbs", nlohmann::json::object()));
    for (auto& x : xs) {
        x->prepare(shared);
        for (const auto& g : d.instances()) {
            OracleHandle o("nc", p);
            Explanation e = x->explain(g, o, 1234);
            EXPECT_EQ(e.oracle_calls, o.calls()) << x->name();
            EXPECT_GE(e.oracle_calls, 1u);
            if (e.found) {
                EXPECT_NE(p->classify(e.counterfactual), p->classify(g)) << x->name();
            } else {
                EXPECT_EQ(e.counterfactual, g);
                EXPECT_TRUE(e.edit_trace.empty());
            }
        }
    }
}

TEST(ExplainerFactoryTest, StrictParamsAndUnknownNames) {
    EXPECT_THROW(make_builtin_explainer("dce", {{"max_forward_flips", 3}}), ConfigError);
    EXPECT_THROW(make_builtin_explainer("obs", {{"max_backward_passes", 0}}), ConfigError);
    try {
        make_builtin_explainer("macss", nlohmann::json::object());
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("unknown component 'macss'; known: dce, obs, dbs"),
                  std::string::npos);
    }
}

}  // namespace
}  // namespace cfbench
