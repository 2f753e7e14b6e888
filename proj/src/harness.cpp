#include "cfbench/harness.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "cfbench/error.hpp"
#include "cfbench/fs_util.hpp"
#include "cfbench/params.hpp"
#include "cfbench/report.hpp"
#include "cfbench/rng.hpp"

namespace cfbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
const std::vector<std::string> kOutputFormats = {"csv", "json", "markdown"};

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
    for (const auto& [k, _] : obj.items())
        if (!allowed.count(k)) throw ConfigError(fmt::format("{}.{}: unknown key", path, k));
}

const json& require(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(fmt::format("{}.{}: required field missing", path, key));
    return *it;
}

std::string string_field(const json& v, const std::string& path) {
    if (!v.is_string() || v.get<std::string>().empty())
        throw ConfigError(fmt::format("{}: expected a non-empty string", path));
    return v.get<std::string>();
}

json params_field(const json& obj, const std::string& path) {
    auto it = obj.find("params");
    if (it == obj.end()) return json::object();
    if (!it->is_object()) throw ConfigError(fmt::format("{}.params: expected an object", path));
    return *it;
}

std::vector<std::string> string_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty())
        throw ConfigError(fmt::format("{}: expected a non-empty array of strings", path));
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto s = string_field(v[i], fmt::format("{}[{}]", path, i));
        if (!seen.insert(s).second)
            throw ConfigError(fmt::format("{}[{}]: duplicate entry '{}'", path, i, s));
        out.push_back(std::move(s));
    }
    return out;
}

void check_run_id(const std::string& id) {
    if (id == "." || id == ".." || id.find_first_of("/\\") != std::string::npos)
        throw ConfigError("config.run_id: must be a plain directory name");
}

std::string utc_timestamp() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

}  // namespace

RunConfig parse_config(std::string_view bytes, const Registry& registry) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config: malformed JSON: {}", e.what()));
    }
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown_keys(j,
                        {"run_id", "seed", "data_dir", "model_dir", "output_dir", "dataset", "oracle",
                         "explainers", "metrics", "parallelism", "output_formats"},
                        "config");

    RunConfig cfg;
    cfg.run_id = string_field(require(j, "run_id", "config"), "config.run_id");
    check_run_id(cfg.run_id);
    if (j.contains("seed")) {
        const auto seed = as_uint(j["seed"]);
        if (!seed) throw ConfigError("config.seed: expected a non-negative integer");
        cfg.seed = *seed;
    }
    for (auto [key, field] : {std::pair{"data_dir", &cfg.data_dir},
                              std::pair{"model_dir", &cfg.model_dir},
                              std::pair{"output_dir", &cfg.output_dir}}) {
        if (j.contains(key)) *field = string_field(j[key], fmt::format("config.{}", key));
    }

    const json& ds = require(j, "dataset", "config");
    if (!ds.is_object()) throw ConfigError("config.dataset: expected an object");
    reject_unknown_keys(ds, {"name", "params", "path"}, "dataset");
    cfg.dataset.name = string_field(require(ds, "name", "dataset"), "dataset.name");
    cfg.dataset.params = params_field(ds, "dataset");
    if (ds.contains("path")) cfg.dataset.path = string_field(ds["path"], "dataset.path");
    registry.create_dataset(cfg.dataset.name, cfg.dataset.params, cfg.seed, "dataset");

    const json& orc = require(j, "oracle", "config");
    if (!orc.is_object()) throw ConfigError("config.oracle: expected an object");
    reject_unknown_keys(orc, {"name", "params"}, "oracle");
    cfg.oracle.name = string_field(require(orc, "name", "oracle"), "oracle.name");
    cfg.oracle.params = params_field(orc, "oracle");
    registry.create_oracle(cfg.oracle.name, cfg.oracle.params, "oracle");

    const json& xs = require(j, "explainers", "config");
    if (!xs.is_array() || xs.empty())
        throw ConfigError("config.explainers: expected a non-empty array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::string path = fmt::format("explainers[{}]", i);
        const json& x = xs[i];
        if (!x.is_object()) throw ConfigError(path + ": expected an object");
        reject_unknown_keys(x, {"name", "params", "label"}, path);
        ExplainerConfig ec;
        ec.name = string_field(require(x, "name", path), path + ".name");
        ec.params = params_field(x, path);
        ec.label = x.contains("label") ? string_field(x["label"], path + ".label") : ec.name;
        if (!labels.insert(ec.label).second)
            throw ConfigError(fmt::format("{}.label: duplicate explainer label '{}'", path, ec.label));
        registry.create_explainer(ec.name, ec.params, path);
        cfg.explainers.push_back(std::move(ec));
    }

    if (j.contains("metrics")) {
        cfg.metrics = string_list(j["metrics"], "config.metrics");
        for (std::size_t i = 0; i < cfg.metrics.size(); ++i)
            registry.metric(cfg.metrics[i], fmt::format("metrics[{}]", i));
    } else {
        cfg.metrics = registry.names(ComponentKind::metric);
    }

    if (j.contains("parallelism")) {
        const auto p = as_uint(j["parallelism"]);
        if (!p || *p == 0) throw ConfigError("config.parallelism: expected a positive integer");
        cfg.parallelism = static_cast<std::size_t>(*p);
    }

    if (j.contains("output_formats")) {
        cfg.output_formats = string_list(j["output_formats"], "config.output_formats");
        for (std::size_t i = 0; i < cfg.output_formats.size(); ++i) {
            const auto& f = cfg.output_formats[i];
            if (std::find(kOutputFormats.begin(), kOutputFormats.end(), f) == kOutputFormats.end())
                throw ConfigError(fmt::format(
                    "output_formats[{}]: unknown format '{}'; known: csv, json, markdown", i, f));
        }
    } else {
        cfg.output_formats = kOutputFormats;
    }
    return cfg;
}

json to_json(const RunConfig& cfg) {
    json ds = {{"name", cfg.dataset.name}, {"params", cfg.dataset.params}};
    if (cfg.dataset.path) ds["path"] = *cfg.dataset.path;
    json xs = json::array();
    for (const auto& x : cfg.explainers)
        xs.push_back({{"name", x.name}, {"params", x.params}, {"label", x.label}});
    return {{"run_id", cfg.run_id},
            {"seed", cfg.seed},
            {"data_dir", cfg.data_dir},
            {"model_dir", cfg.model_dir},
            {"output_dir", cfg.output_dir},
            {"dataset", ds},
            {"oracle", {{"name", cfg.oracle.name}, {"params", cfg.oracle.params}}},
            {"explainers", xs},
            {"metrics", cfg.metrics},
            {"parallelism", cfg.parallelism},
            {"output_formats", cfg.output_formats}};
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* d = std::getenv("CFBENCH_DATA_DIR"); d && *d) cfg.data_dir = d;
    if (const char* m = std::getenv("CFBENCH_MODEL_DIR"); m && *m) cfg.model_dir = m;
}

Evaluator::Evaluator(std::string label, std::shared_ptr<const Explainer> explainer,
                     std::shared_ptr<const Dataset> dataset, OracleHandle oracle,
                     std::vector<MetricDef> metrics, std::uint64_t run_seed)
    : label_(std::move(label)),
      explainer_(std::move(explainer)),
      dataset_(std::move(dataset)),
      oracle_(std::move(oracle)),
      metrics_(std::move(metrics)),
      run_seed_(run_seed) {}

EvaluationRecord Evaluator::evaluate(std::size_t instance_index) const {
    const GraphInstance& g = (*dataset_)[instance_index];
    OracleHandle handle = oracle_.fork();
    const std::uint64_t seed = mix_seed(run_seed_, label_, g.id());

    std::optional<Explanation> expl;
    try {
        expl = explainer_->explain(g, handle, seed);
    } catch (const std::exception& e) {
        expl = Explanation{g.id(), g, false, handle.calls(), 0.0, {}, e.what()};
    }
    if (expl->oracle_calls != handle.calls())
        throw Error(fmt::format("{}: instance {} reported {} calls, handle counted {}", label_,
                                g.id(), expl->oracle_calls, handle.calls()));
    calls_ += handle.calls();

    // Metric predictions bypass the counter.
    const Predictor& phi = *oracle_.predictor();
    const ClassLabel pred_g = phi.classify(g);
    const ClassLabel pred_cf = phi.classify(expl->counterfactual);
    return evaluate_record(g, *expl, pred_g, pred_cf, label_);
}

std::vector<EvaluationRecord> Evaluator::evaluate_all() const {
    std::vector<EvaluationRecord> out;
    out.reserve(dataset_->size());
    for (std::size_t i = 0; i < dataset_->size(); ++i) out.push_back(evaluate(i));
    return out;
}

RunReport execute(const RunConfig& cfg, const Registry& registry, RunLog& log) {
    const auto start = std::chrono::steady_clock::now();

    DatasetSpec dspec = registry.create_dataset(cfg.dataset.name, cfg.dataset.params, cfg.seed);
    if (cfg.dataset.path) dspec.path = fs::path(*cfg.dataset.path);
    auto dataset = std::make_shared<const Dataset>(ensure_dataset(dspec, cfg.data_dir, log));

    OracleSpec ospec = registry.create_oracle(cfg.oracle.name, cfg.oracle.params);
    OracleHandle oracle = ensure_oracle(ospec, *dataset, cfg.model_dir, log);

    std::vector<MetricDef> metrics;
    for (const auto& m : cfg.metrics) metrics.push_back(registry.metric(m));

    std::vector<std::unique_ptr<Evaluator>> evaluators;
    for (std::size_t i = 0; i < cfg.explainers.size(); ++i) {
        const auto& xc = cfg.explainers[i];
        std::shared_ptr<Explainer> x =
            registry.create_explainer(xc.name, xc.params, fmt::format("explainers[{}]", i));
        x->prepare(dataset);
        evaluators.push_back(std::make_unique<Evaluator>(xc.label, std::move(x), dataset,
                                                         oracle.fork(), metrics, cfg.seed));
    }

    const std::size_t n = dataset->size();
    const std::size_t total = evaluators.size() * n;
    std::vector<std::vector<std::optional<EvaluationRecord>>> slots(
        evaluators.size(), std::vector<std::optional<EvaluationRecord>>(n));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < total && !failed; t = next++) {
            try {
                slots[t / n][t % n] = evaluators[t / n]->evaluate(t % n);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                failed = true;
            }
        }
    };
    const std::size_t workers = std::min(cfg.parallelism, std::max<std::size_t>(total, 1));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    RunReport report;
    report.run_id = cfg.run_id;
    report.config = to_json(cfg);
    report.metrics = cfg.metrics;
    report.oracle = ospec.name;
    report.oracle_training_accuracy = training_accuracy(*oracle.predictor(), *dataset);
    for (std::size_t e = 0; e < evaluators.size(); ++e) {
        ExplainerResult res;
        res.label = evaluators[e]->label();
        res.name = cfg.explainers[e].name;
        std::uint64_t calls = 0;
        for (auto& slot : slots[e]) {
            calls += slot->calls;
            res.records.push_back(std::move(*slot));
        }
        res.evaluator_calls = evaluators[e]->calls();
        if (res.evaluator_calls != calls)
            throw Error(fmt::format("{}: evaluator counted {} calls, records sum to {}", res.label,
                                    res.evaluator_calls, calls));
        res.aggregate = aggregate(res.label, res.records);
        log.info(fmt::format("{}: {} instances, mean GED {:.2f}, mean calls {:.2f}", res.label,
                             res.records.size(), res.aggregate.ged, res.aggregate.calls));
        report.results.push_back(std::move(res));
    }
    report.version = kVersion;
    report.timestamp = utc_timestamp();
    report.total_wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

fs::path run_directory(const RunConfig& cfg) { return fs::path(cfg.output_dir) / cfg.run_id; }

RunReport run(const RunConfig& cfg, const Registry& registry, RunLog& log) {
    const fs::path marker = run_directory(cfg) / "PARTIAL";
    try {
        RunReport report = execute(cfg, registry, log);
        for (const auto& p : write_report(report, cfg.output_formats, cfg.output_dir))
            log.info("wrote " + p.string());
        std::error_code ec;
        fs::remove(marker, ec);
        log.info(fmt::format("total wall time {:.3f} s", report.total_wall_time_s));
        return report;
    } catch (const std::exception& e) {
        try {
            write_file_atomic(marker, fmt::format("run '{}' aborted: {}\n", cfg.run_id, e.what()));
        } catch (const std::exception&) {
        }
        throw;
    }
}

}  // namespace cfbench
