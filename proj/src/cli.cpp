#include "cfbench/cli.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cfbench/dataset.hpp"
#include "cfbench/error.hpp"
#include "cfbench/fs_util.hpp"
#include "cfbench/harness.hpp"
#include "cfbench/registry.hpp"
#include "cfbench/report.hpp"

namespace cfbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// k=v; v is read as a JSON literal when it parses as one, else as a string.
json parse_params(const std::vector<std::string>& pairs) {
    json params = json::object();
    for (const auto& kv : pairs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError(fmt::format("--param '{}': expected key=value", kv));
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        json v = json::parse(value, nullptr, false);
        params[key] = v.is_discarded() ? json(value) : v;
    }
    return params;
}

void print_list(const Registry& registry, std::ostream& out) {
    const std::pair<ComponentKind, const char*> sections[] = {
        {ComponentKind::dataset, "datasets"},
        {ComponentKind::oracle, "oracles"},
        {ComponentKind::explainer, "explainers"},
        {ComponentKind::metric, "metrics"}};
    for (const auto& [kind, title] : sections) {
        out << title << ":\n";
        for (const auto& name : registry.names(kind)) out << "  " << name << "\n";
    }
}

const char* kConfigHelp = R"(config schema (JSON, unknown keys rejected):
  run_id          string (required)
  seed            non-negative integer (default 0)
  data_dir        string (default "data")
  model_dir       string (default "models")
  output_dir      string (default "output")
  dataset         {name, params?, path?} (required)
  oracle          {name, params?} (required)
  explainers      non-empty [{name, params?, label?}]
  metrics         non-empty subset of the metric names (default: all)
  parallelism     positive integer (default 1)
  output_formats  non-empty subset of csv, json, markdown (default: all)
)";

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Benchmark harness for graph counterfactual explainers", "cfbench"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> parallel;
    std::optional<std::string> out_dir;
    auto* run_cmd = app.add_subcommand("run", "Run the evaluations described by a config file");
    run_cmd->add_option("--config", config_path, "Config file")->required();
    run_cmd->add_option("--seed", seed, "Override the run seed");
    run_cmd->add_option("--parallel", parallel, "Worker count")->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", out_dir, "Override the output directory");
    run_cmd->footer(kConfigHelp);

    std::string gen_name;
    std::vector<std::string> gen_params;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("generate-dataset", "Generate a dataset file");
    gen_cmd->add_option("--name", gen_name, "Generator name")->required();
    gen_cmd->add_option("--param", gen_params, "Generator parameter key=value");
    gen_cmd->add_option("--out", gen_out, "Output path (.jsonl)")->required();

    auto* list_cmd = app.add_subcommand("list", "List registered components");

    std::string report_input;
    std::string report_format = "markdown";
    auto* report_cmd = app.add_subcommand("report", "Render a stored run report");
    report_cmd->add_option("--input", report_input, "report.json of a run")->required();
    report_cmd->add_option("--format", report_format, "markdown or csv")
        ->check(CLI::IsMember({"markdown", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << failed->help();
        return 1;
    }

    const Registry& registry = default_registry();
    try {
        if (*list_cmd) {
            print_list(registry, out);
            return 0;
        }
        if (*gen_cmd) {
            DatasetSpec spec = registry.create_dataset(gen_name, parse_params(gen_params), 0, "dataset");
            Dataset d = spec.generate();
            save(d, gen_out);
            out << fmt::format("wrote {} instances of '{}' to {}\n", d.size(), gen_name, gen_out);
            return 0;
        }
        if (*report_cmd) {
            if (!fs::exists(report_input)) {
                err << "error: " << report_input << ": file not found\n";
                return 1;
            }
            json j;
            try {
                j = json::parse(read_file(report_input));
            } catch (const json::parse_error& e) {
                throw ValidationError(fmt::format("{}: malformed JSON: {}", report_input, e.what()));
            }
            const RunReport r = report_from_json(j);
            out << (report_format == "csv" ? render_csv(r) : render_markdown(r));
            return 0;
        }
        if (*run_cmd) {
            if (!fs::exists(config_path)) {
                err << "error: " << config_path << ": file not found\n";
                return 1;
            }
            RunConfig cfg = parse_config(read_file(config_path), registry);
            apply_env_overrides(cfg);
            if (seed) cfg.seed = *seed;
            if (parallel) cfg.parallelism = *parallel;
            if (out_dir) cfg.output_dir = *out_dir;
            RunLog log(&err);
            const RunReport report = run(cfg, registry, log);
            out << render_markdown(report);
            out << fmt::format("results in {} (total wall time {:.3f} s)\n",
                               run_directory(cfg).string(), report.total_wall_time_s);
            return 0;
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        if (*run_cmd) err << "\n" << kConfigHelp;
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace cfbench
