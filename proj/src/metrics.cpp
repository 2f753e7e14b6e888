#include "cfbench/metrics.hpp"

namespace cfbench {

double sparsity(std::size_t ged_value, const GraphInstance& g) {
    return 1.0 - edit_ratio(ged_value, g);
}

double edit_ratio(std::size_t ged_value, const GraphInstance& g) {
    return static_cast<double>(ged_value) / static_cast<double>(feature_count(g));
}

EvaluationRecord evaluate_record(const GraphInstance& g, const Explanation& expl, ClassLabel pred_g,
                                 ClassLabel pred_cf, const std::string& explainer) {
    EvaluationRecord r;
    r.instance_id = g.id();
    r.explainer = explainer;
    r.runtime_s = expl.wall_time_s;
    r.ged = ged(g, expl.counterfactual);
    r.calls = expl.oracle_calls;
    r.correctness = correctness(pred_g, pred_cf);
    r.edit_ratio = edit_ratio(r.ged, g);
    r.sparsity = 1.0 - r.edit_ratio;
    r.fidelity = fidelity(pred_g, pred_cf, g.label());
    r.oracle_correct = oracle_accuracy(pred_g, g.label());
    r.found = expl.found;
    r.error = expl.error;
    return r;
}

AggregateRow aggregate(const std::string& explainer, std::span<const EvaluationRecord> records) {
    AggregateRow row;
    row.explainer = explainer;
    row.count = records.size();
    if (records.empty()) return row;
    // Integer-valued columns are summed exactly before dividing.
    std::uint64_t ged = 0, calls = 0;
    std::int64_t correct = 0, fid = 0, acc = 0;
    double runtime = 0.0, sparse = 0.0, ratio = 0.0;
    for (const auto& r : records) {
        runtime += r.runtime_s;
        ged += r.ged;
        calls += r.calls;
        correct += r.correctness;
        sparse += r.sparsity;
        ratio += r.edit_ratio;
        fid += r.fidelity;
        acc += r.oracle_correct;
    }
    const auto n = static_cast<double>(records.size());
    row.runtime_s = runtime / n;
    row.ged = static_cast<double>(ged) / n;
    row.calls = static_cast<double>(calls) / n;
    row.correctness = static_cast<double>(correct) / n;
    row.sparsity = sparse / n;
    row.edit_ratio = ratio / n;
    row.fidelity = static_cast<double>(fid) / n;
    row.oracle_accuracy = static_cast<double>(acc) / n;
    return row;
}

const std::vector<MetricDef>& builtin_metrics() {
    static const std::vector<MetricDef> metrics = {
        {"runtime", "t (s)", [](const AggregateRow& r) { return r.runtime_s; }},
        {"ged", "GED", [](const AggregateRow& r) { return r.ged; }},
        {"calls", "#Calls", [](const AggregateRow& r) { return r.calls; }},
        {"correctness", "C", [](const AggregateRow& r) { return r.correctness; }},
        {"sparsity", "S", [](const AggregateRow& r) { return r.sparsity; }},
        {"fidelity", "F", [](const AggregateRow& r) { return r.fidelity; }},
        {"oracle_accuracy", "Acc", [](const AggregateRow& r) { return r.oracle_accuracy; }},
    };
    return metrics;
}

}  // namespace cfbench
