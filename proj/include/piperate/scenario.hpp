#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "piperate/result.hpp"
#include "piperate/sim_time.hpp"

namespace piperate {

struct DiskConfig {
    std::string disk_id;
    std::int64_t capacity = 0;  // bytes/second sustained read throughput
};

struct MachineConfig {
    std::string host;
    std::int64_t vcores = 0;
    std::int64_t memory = 0;
    std::vector<DiskConfig> disks;
    bool runs_datanode = false;
    bool runs_nodemanager = false;
    std::int64_t nic_cap = 0;  // bytes/second; 0 = unlimited
};

struct ReplicaLocation {
    std::string host;
    std::string disk_id;
};

struct BlockConfig {
    std::string block_id;
    std::int64_t size = 0;  // bytes
    std::vector<ReplicaLocation> replicas;
};

struct FileConfig {
    std::string name;
    std::vector<BlockConfig> blocks;
};

struct ContainerClassConfig {
    std::string class_name;
    std::int64_t vcores = 0;
    std::int64_t memory = 0;
    std::int64_t io_rate = 0;  // bytes/second; 0 = no rate class
};

struct ContainerRequestConfig {
    std::string container_id;
    std::string class_name;
    std::string host;
    SimTime start_time = 0;
    std::string file;
};

struct Parameters {
    SimTime dt = 100'000;            // 0.1 s
    SimTime poll_interval = 1'000'000;
    SimTime watch_latency = 10'000;  // 0.01 s
    std::int64_t aimd_increase = 5'000'000;  // bytes/second per second
    double aimd_beta = 0.5;
    SimTime sim_duration = 0;
    std::int64_t seed = 1;
};

struct ScenarioConfig {
    std::vector<MachineConfig> machines;
    std::vector<FileConfig> files;
    std::vector<ContainerClassConfig> container_classes;
    std::vector<ContainerRequestConfig> container_requests;
    bool shaping_enabled = true;
    Parameters parameters;
};

// Parses and validates; the error string names the first violated
// constraint. Unknown JSON fields are errors.
Result<ScenarioConfig, std::string> load_scenario_string(const std::string& text);
Result<ScenarioConfig, std::string> load_scenario_file(const std::string& path);

// key=value overrides for `shaping_enabled` and `parameters.*`.
Result<void, std::string> apply_override(ScenarioConfig& config, const std::string& key,
                                         const std::string& value);

Result<void, std::string> validate_scenario(const ScenarioConfig& config);

// Canonical JSON rendering of everything except shaping_enabled; two runs
// are comparable iff their normalized forms are byte-identical.
std::string normalized_scenario_json(const ScenarioConfig& config);

}  // namespace piperate
