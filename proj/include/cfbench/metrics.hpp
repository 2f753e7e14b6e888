#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cfbench/explainer.hpp"
#include "cfbench/graph.hpp"

namespace cfbench {

// One (explainer, instance) row.
struct EvaluationRecord {
    std::uint64_t instance_id = 0;
    std::string explainer;
    double runtime_s = 0.0;
    std::size_t ged = 0;
    std::uint64_t calls = 0;
    int correctness = 0;
    double sparsity = 1.0;
    double edit_ratio = 0.0;
    int fidelity = 0;
    int oracle_correct = 0;
    bool found = false;
    std::string error;

    friend bool operator==(const EvaluationRecord&, const EvaluationRecord&) = default;
};

// Column means over all records of one explainer.
struct AggregateRow {
    std::string explainer;
    std::size_t count = 0;
    double runtime_s = 0.0;
    double ged = 0.0;
    double calls = 0.0;
    double correctness = 0.0;
    double sparsity = 0.0;
    double edit_ratio = 0.0;
    double fidelity = 0.0;
    double oracle_accuracy = 0.0;

    friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

inline int correctness(ClassLabel pred_g, ClassLabel pred_cf) { return pred_g != pred_cf ? 1 : 0; }

// 1 - D/|G|, not clamped.
double sparsity(std::size_t ged_value, const GraphInstance& g);

// D/|G|.
double edit_ratio(std::size_t ged_value, const GraphInstance& g);

inline int fidelity(ClassLabel pred_g, ClassLabel pred_cf, ClassLabel truth) {
    return (pred_g == truth ? 1 : 0) - (pred_cf == truth ? 1 : 0);
}

inline int oracle_accuracy(ClassLabel pred_g, ClassLabel truth) { return pred_g == truth ? 1 : 0; }

EvaluationRecord evaluate_record(const GraphInstance& g, const Explanation& expl, ClassLabel pred_g,
                                 ClassLabel pred_cf, const std::string& explainer);

AggregateRow aggregate(const std::string& explainer, std::span<const EvaluationRecord> records);

// A named metric: identifier used in configs, its table header, and where
// its mean lives in an aggregate row.
struct MetricDef {
    std::string id;
    std::string header;
    std::function<double(const AggregateRow&)> mean;
};

// The seven metrics, in table order: runtime, ged, calls, correctness,
// sparsity, fidelity, oracle_accuracy.
const std::vector<MetricDef>& builtin_metrics();

}  // namespace cfbench
