#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "piperate/result.hpp"
#include "piperate/scenario.hpp"
#include "piperate/shaper.hpp"
#include "piperate/sim_time.hpp"

namespace piperate {

enum class SimError {
    no_such_file,
    no_such_block,
    no_such_host,
    container_not_running,
};

const char* to_string(SimError e);

constexpr int kDataNodePort = 50010;
constexpr int kFirstEphemeralPort = 32768;

struct ConnectionRecord {
    PipeKey key;
    std::string container_id;
    SimTime observed_since = 0;
    bool operator==(const ConnectionRecord&) const = default;
};

struct BlockRef {
    std::string block_id;
    std::int64_t size = 0;
    std::vector<ReplicaLocation> replicas;
};

struct Pipe {
    PipeKey key;
    std::string key_render;  // cached ordering key
    std::string container_id;
    std::string dn_host;
    std::string disk_id;
    std::string block_id;
    std::int64_t block_size = 0;
    double remaining_bytes = 0;
    SimTime start_time = 0;
    bool active = false;
    double tcp_demand = 0;  // bytes/second, AIMD state

    double delivered_bytes() const {
        return static_cast<double>(block_size) - remaining_bytes;
    }
};

/*
 * Cluster
 *
 * Data-plane state of the simulated cluster: machines and their disks, the
 * block map, open pipes, and the per-DataNode traffic shapers. One advance()
 * call moves every active pipe across one time step.
 *
 * Flow model per step, per pipe:
 *   post_shaper = min(tcp_demand, shaper grant / dt)   (unlimited if unclassified)
 *   delivered   = min(post_shaper*dt, disk share, NIC share, remaining block bytes)
 * Disk and NIC shares come from a seniority pass: active pipes ordered by
 * (start_time, key rendering), each taking up to the remaining budget.
 *
 * Demand feedback: a pipe that was curtailed by its disk or NIC multiplies
 * tcp_demand by aimd_beta; a pipe that received its full demand adds
 * aimd_increase*dt; a pipe clamped only by its shaper class holds steady
 * (the shaper queues rather than drops, so the sender does not back off
 * below the clamp). A new pipe starts greedy, demanding the full capacity
 * of the disk it reads from.
 */
class Cluster {
public:
    static Result<std::unique_ptr<Cluster>, std::string> build(const ScenarioConfig& config);

    // Container lifecycle as seen by the data plane.
    void register_container(const std::string& container_id, const std::string& host);
    void container_finished(const std::string& container_id);  // closes its pipes

    Result<std::vector<BlockRef>, SimError> locate_blocks(const std::string& file) const;
    Result<PipeKey, SimError> open_pipe(const std::string& container_id,
                                        const std::string& block_id, SimTime now);

    struct Sample {
        const Pipe* pipe;
        double delivered_bytes;
    };
    struct StepResult {
        std::vector<Sample> samples;       // one per pipe active during the step
        std::vector<const Pipe*> closed;   // pipes that finished their block
    };
    // Advances [now, now+dt). Samples are ordered by pipe key rendering.
    StepResult advance(SimTime now, SimTime dt);

    Result<std::vector<ConnectionRecord>, SimError> connection_table(
        const std::string& host) const;

    TrafficShaper& shaper(const std::string& dn_host);
    const TrafficShaper& shaper(const std::string& dn_host) const;
    bool has_shaper(const std::string& dn_host) const { return shapers_.count(dn_host) != 0; }
    std::vector<std::string> datanode_hosts() const;
    std::vector<std::string> nodemanager_hosts() const;

    std::vector<const Pipe*> active_pipes() const;
    std::vector<const Pipe*> all_pipes() const;
    const MachineConfig* machine(const std::string& host) const;

private:
    Cluster() = default;

    struct ContainerState {
        std::string host;
        bool running = false;
    };

    std::int64_t disk_capacity(const std::string& host, const std::string& disk_id) const;

    std::map<std::string, MachineConfig> machines_;
    std::map<std::string, FileConfig> files_;          // by file name
    std::map<std::string, BlockRef> blocks_;           // by block id
    std::map<std::string, ContainerState> containers_;
    std::map<std::string, int> next_port_;             // per host
    std::map<std::string, TrafficShaper> shapers_;     // per DataNode host
    std::vector<std::unique_ptr<Pipe>> pipes_;         // open order; stable
    Parameters params_;
};

}  // namespace piperate
