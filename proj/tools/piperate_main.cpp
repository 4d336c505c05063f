// piperate: run, validate, and compare data-rate-control scenarios.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "piperate/harness.hpp"
#include "piperate/scenario.hpp"

namespace {

std::vector<std::pair<std::string, std::string>> split_overrides(
    const std::vector<std::string>& raw, std::string& error) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& kv : raw) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            error = "override must look like key=value: " + kv;
            return {};
        }
        out.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"data pipe rate control simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    std::vector<std::string> raw_overrides;
    auto* run = app.add_subcommand("run", "run a scenario and emit metrics");
    run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--set", raw_overrides,
                    "override shaping_enabled or parameters.* (key=value)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("--scenario", validate_path, "scenario JSON file")->required();

    std::string baseline_dir, shaped_dir, report_file;
    auto* compare = app.add_subcommand("compare", "compare a baseline run with a shaped run");
    compare->add_option("--baseline", baseline_dir, "baseline run directory")->required();
    compare->add_option("--shaped", shaped_dir, "shaped run directory")->required();
    compare->add_option("--out", report_file, "report output file")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        std::string err;
        auto overrides = split_overrides(raw_overrides, err);
        if (!err.empty()) {
            std::fprintf(stderr, "error: %s\n", err.c_str());
            return piperate::kExitValidation;
        }
        auto result = piperate::run_scenario_file(scenario_path, out_dir, overrides);
        if (!result.ok()) {
            std::fprintf(stderr, "error: %s\n", result.error().message.c_str());
            return result.error().exit_code;
        }
        std::fputs(result.value().summary_text.c_str(), stdout);
        return piperate::kExitOk;
    }

    if (validate->parsed()) {
        auto loaded = piperate::load_scenario_file(validate_path);
        if (!loaded.ok()) {
            std::fprintf(stderr, "invalid scenario: %s\n", loaded.error().c_str());
            return piperate::kExitValidation;
        }
        std::printf("scenario ok: %zu machines, %zu files, %zu container requests\n",
                    loaded.value().machines.size(), loaded.value().files.size(),
                    loaded.value().container_requests.size());
        return piperate::kExitOk;
    }

    if (compare->parsed()) {
        auto result = piperate::compare_runs(baseline_dir, shaped_dir, report_file);
        if (!result.ok()) {
            std::fprintf(stderr, "error: %s\n", result.error().message.c_str());
            return result.error().exit_code;
        }
        std::fputs(result.value().text.c_str(), stdout);
        return piperate::kExitOk;
    }
    return piperate::kExitOk;
}
