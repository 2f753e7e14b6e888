#include "cfbench/report.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "cfbench/error.hpp"
#include "cfbench/fs_util.hpp"

namespace cfbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string render_csv(const RunReport& r) {
    std::string out =
        "run_id,explainer,instance_id,runtime_s,ged,calls,correctness,sparsity,edit_ratio,"
        "fidelity,oracle_correct,found\n";
    for (const auto& res : r.results) {
        for (const auto& rec : res.records) {
            out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.run_id, rec.explainer,
                               rec.instance_id, rec.runtime_s, rec.ged, rec.calls, rec.correctness,
                               rec.sparsity, rec.edit_ratio, rec.fidelity, rec.oracle_correct,
                               rec.found ? "true" : "false");
        }
    }
    return out;
}

std::string render_markdown(const RunReport& r) {
    std::vector<const MetricDef*> columns;
    for (const auto& m : builtin_metrics()) {
        if (std::find(r.metrics.begin(), r.metrics.end(), m.id) != r.metrics.end())
            columns.push_back(&m);
    }
    std::string out = "| Exp. |";
    std::string rule = "|---|";
    for (const auto* c : columns) {
        out += fmt::format(" {} |", c->header);
        rule += "---:|";
    }
    out += "\n" + rule + "\n";
    for (const auto& res : r.results) {
        out += fmt::format("| {} |", res.label);
        for (const auto* c : columns) out += fmt::format(" {:.4f} |", c->mean(res.aggregate));
        out += "\n";
    }
    return out;
}

namespace {

json record_json(const EvaluationRecord& rec) {
    json j = {{"instance_id", rec.instance_id}, {"explainer", rec.explainer},
              {"runtime_s", rec.runtime_s},     {"ged", rec.ged},
              {"calls", rec.calls},             {"correctness", rec.correctness},
              {"sparsity", rec.sparsity},       {"edit_ratio", rec.edit_ratio},
              {"fidelity", rec.fidelity},       {"oracle_correct", rec.oracle_correct},
              {"found", rec.found}};
    if (!rec.error.empty()) j["error"] = rec.error;
    return j;
}

EvaluationRecord record_from_json(const json& j) {
    EvaluationRecord rec;
    rec.instance_id = j.at("instance_id").get<std::uint64_t>();
    rec.explainer = j.at("explainer").get<std::string>();
    rec.runtime_s = j.at("runtime_s").get<double>();
    rec.ged = j.at("ged").get<std::size_t>();
    rec.calls = j.at("calls").get<std::uint64_t>();
    rec.correctness = j.at("correctness").get<int>();
    rec.sparsity = j.at("sparsity").get<double>();
    rec.edit_ratio = j.at("edit_ratio").get<double>();
    rec.fidelity = j.at("fidelity").get<int>();
    rec.oracle_correct = j.at("oracle_correct").get<int>();
    rec.found = j.at("found").get<bool>();
    rec.error = j.value("error", std::string{});
    return rec;
}

json aggregate_json(const AggregateRow& a) {
    return {{"count", a.count},         {"runtime_s", a.runtime_s},
            {"ged", a.ged},             {"calls", a.calls},
            {"correctness", a.correctness}, {"sparsity", a.sparsity},
            {"edit_ratio", a.edit_ratio},   {"fidelity", a.fidelity},
            {"oracle_accuracy", a.oracle_accuracy}};
}

AggregateRow aggregate_from_json(const std::string& label, const json& j) {
    AggregateRow a;
    a.explainer = label;
    a.count = j.at("count").get<std::size_t>();
    a.runtime_s = j.at("runtime_s").get<double>();
    a.ged = j.at("ged").get<double>();
    a.calls = j.at("calls").get<double>();
    a.correctness = j.at("correctness").get<double>();
    a.sparsity = j.at("sparsity").get<double>();
    a.edit_ratio = j.at("edit_ratio").get<double>();
    a.fidelity = j.at("fidelity").get<double>();
    a.oracle_accuracy = j.at("oracle_accuracy").get<double>();
    return a;
}

}  // namespace

json to_json(const RunReport& r) {
    json results = json::array();
    for (const auto& res : r.results) {
        json records = json::array();
        for (const auto& rec : res.records) records.push_back(record_json(rec));
        results.push_back({{"label", res.label},
                           {"name", res.name},
                           {"evaluator_calls", res.evaluator_calls},
                           {"aggregate", aggregate_json(res.aggregate)},
                           {"records", records}});
    }
    return {{"run_id", r.run_id},
            {"config", r.config},
            {"metrics", r.metrics},
            {"oracle", {{"name", r.oracle}, {"training_accuracy", r.oracle_training_accuracy}}},
            {"results", results},
            {"environment", {{"version", r.version}, {"timestamp", r.timestamp}}},
            {"total_wall_time_s", r.total_wall_time_s}};
}

RunReport report_from_json(const json& j) {
    try {
        RunReport r;
        r.run_id = j.at("run_id").get<std::string>();
        r.config = j.at("config");
        r.metrics = j.at("metrics").get<std::vector<std::string>>();
        r.oracle = j.at("oracle").at("name").get<std::string>();
        r.oracle_training_accuracy = j.at("oracle").at("training_accuracy").get<double>();
        for (const auto& res : j.at("results")) {
            ExplainerResult er;
            er.label = res.at("label").get<std::string>();
            er.name = res.at("name").get<std::string>();
            er.evaluator_calls = res.at("evaluator_calls").get<std::uint64_t>();
            er.aggregate = aggregate_from_json(er.label, res.at("aggregate"));
            for (const auto& rec : res.at("records")) er.records.push_back(record_from_json(rec));
            r.results.push_back(std::move(er));
        }
        r.version = j.at("environment").at("version").get<std::string>();
        r.timestamp = j.at("environment").at("timestamp").get<std::string>();
        r.total_wall_time_s = j.at("total_wall_time_s").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("run report: {}", e.what()));
    }
}

std::vector<fs::path> write_report(const RunReport& r, const std::vector<std::string>& formats,
                                   const fs::path& output_dir) {
    const fs::path dir = output_dir / r.run_id;
    std::vector<fs::path> written;
    for (const auto& f : formats) {
        if (f == "csv") {
            written.push_back(dir / "records.csv");
            write_file_atomic(written.back(), render_csv(r));
        } else if (f == "json") {
            written.push_back(dir / "report.json");
            write_file_atomic(written.back(), to_json(r).dump(2) + "\n");
        } else if (f == "markdown") {
            written.push_back(dir / "report.md");
            write_file_atomic(written.back(), render_markdown(r));
        } else {
            throw ValidationError(fmt::format("unknown output format '{}'", f));
        }
    }
    return written;
}

}  // namespace cfbench
