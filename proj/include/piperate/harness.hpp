#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "piperate/result.hpp"
#include "piperate/scenario.hpp"
#include "piperate/sim_time.hpp"

namespace piperate {

// Exit codes shared by the library and the CLI.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitMismatch = 4;

struct SampleRow {
    SimTime time = 0;      // end of the step the sample covers
    std::string pipe;      // key rendering
    double rate_bps = 0;   // over the preceding dt
};

struct TimelineRow {
    std::string pipe;
    SimTime t1 = 0;  // container start -> first poll after pipe open
    SimTime t2 = 0;  // first poll -> detection
    SimTime t3 = 0;  // detection -> store write complete
    SimTime t4 = 0;  // store write -> executor applied
    SimTime t5 = 0;  // executor applied -> first sample at/below 1.05x rate
    SimTime total = 0;
};

struct PipeSummary {
    std::string pipe;
    std::string container;
    std::string block;
    double delivered_bytes = 0;
    double mean_rate = 0;    // over the pipe's whole sampled lifetime
    double steady_rate = 0;  // over the final quarter of its lifetime
    SimTime open_time = 0;
    std::optional<SimTime> close_time;
};

struct RunOutput {
    std::vector<SampleRow> samples;
    std::vector<TimelineRow> timeline;
    std::vector<PipeSummary> pipes;
    std::vector<std::string> never_controlled;  // pipe renders, shaped runs only
    std::vector<std::string> admission_lines;
    std::string summary_text;
    std::int64_t store_writes = 0;
    std::int64_t submit_failures = 0;
    std::int64_t parse_failures = 0;
    std::int64_t executor_skips = 0;
};

struct RunError {
    int exit_code = kExitValidation;
    std::string message;
};

// Runs one scenario. When out_dir is non-empty, writes throughput.csv,
// timeline.csv, summary.txt plus scenario_normalized.json and run_meta.json
// used by `compare`.
Result<RunOutput, RunError> run_scenario_config(const ScenarioConfig& config,
                                                const std::string& scenario_name,
                                                const std::string& out_dir);

Result<RunOutput, RunError> run_scenario_file(
    const std::string& scenario_path, const std::string& out_dir,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// Mean rate over the final quarter of a pipe's sampled lifetime; samples must
// be one pipe's series in time order.
double steady_state_mean(const std::vector<SampleRow>& series, SimTime dt);

Result<std::vector<SampleRow>, std::string> parse_throughput_csv(const std::string& text);
Result<std::vector<TimelineRow>, std::string> parse_timeline_csv(const std::string& text);
// Parses a "<seconds>.<6 digits>" field back to integer microseconds.
Result<SimTime, std::string> parse_seconds_field(const std::string& text);

struct ComparedPipe {
    std::string pipe;
    std::string container;
    double steady_rate = 0;
    SimTime first_sample = 0;
    SimTime last_sample = 0;
    // shaped run only:
    std::int64_t class_rate = 0;
    double deviation = 0;
    bool pass = false;
};

struct ComparisonReport {
    std::vector<ComparedPipe> baseline;
    std::vector<ComparedPipe> shaped;
    double seniority_ratio = 0;  // earliest-opened pipe over latest-opened, baseline
    std::string text;
};

struct CompareError {
    int exit_code = kExitMismatch;
    std::string message;
};

Result<ComparisonReport, CompareError> compare_runs(const std::string& baseline_dir,
                                                    const std::string& shaped_dir,
                                                    const std::string& out_file);

}  // namespace piperate
