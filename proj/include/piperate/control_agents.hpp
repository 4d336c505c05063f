#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "piperate/coordstore.hpp"
#include "piperate/resource_manager.hpp"
#include "piperate/result.hpp"
#include "piperate/shaper.hpp"
#include "piperate/simcluster.hpp"

namespace piperate {

// Desired rate limit for one pipe; the unit of content exchanged through the
// coordination store.
struct RateSetting {
    std::string container_id;
    PipeKey key;
    std::int64_t rate_bps = 0;
    std::int64_t burst_bytes = 0;

    std::string line() const;  // canonical wire line, without the trailing \n
    bool operator==(const RateSetting&) const = default;
};

// Canonical settings document: one setting per line, lines sorted
// lexicographically, each terminated by \n; the empty set is the empty byte
// string. Serialization is injective over setting sets and parse/serialize
// round-trips to identical bytes.
std::string serialize_settings(std::vector<RateSetting> settings);
Result<std::vector<RateSetting>, std::string> parse_settings(const std::string& bytes);

enum class TrafficEventKind { remove_rule, modify_rule, add_rule };

const char* to_string(TrafficEventKind k);

struct TrafficEvent {
    TrafficEventKind kind;
    RateSetting setting;  // for remove_rule, the previous setting
    bool operator==(const TrafficEvent&) const = default;
};

// Set difference keyed by PipeKey: removals, then modifications, then
// additions, each group ordered by key rendering.
std::vector<TrafficEvent> diff_settings(const std::vector<RateSetting>& old_settings,
                                        const std::vector<RateSetting>& new_settings);

// Instrumentation hooks; all optional. Timestamps are engine times.
struct AgentHooks {
    std::function<void(const PipeKey&, const std::string& container, SimTime)> on_detected;
    std::function<void(const PipeKey&, SimTime)> on_submitted;
    std::function<void(const PipeKey&, std::int64_t rate_bps, SimTime)> on_rule_applied;
};

ZPath tc_root_path();
ZPath datanode_path(const std::string& dn_id);
ZPath nodemanager_path(const std::string& dn_id, const std::string& nm_id);

/*
 * NodeManagerAgent: ConnectionMonitor + TrafficControlDataSubmitter for one
 * NodeManager host. Each tick it snapshots the host's connection table, maps
 * containers to their admitted rate class, and writes one canonical document
 * per destination DataNode into the store (ephemeral child of the DataNode's
 * node). Writes identical to the last written bytes are suppressed.
 */
class NodeManagerAgent {
public:
    NodeManagerAgent(std::string nm_id, Cluster& cluster, ResourceManager& rm,
                     CoordStore& store, AgentHooks hooks = {});

    void tick(SimTime now);

    // Documents produced by the monitor half of the last tick (empty
    // documents signal rule removal for previously written DataNodes).
    std::map<std::string, std::vector<RateSetting>> monitor_snapshot(SimTime now);

    std::int64_t store_writes() const { return store_writes_; }
    std::int64_t submit_failures() const { return submit_failures_; }
    SessionId session() const { return session_; }

private:
    void submit(const std::map<std::string, std::vector<RateSetting>>& documents, SimTime now);

    std::string nm_id_;
    Cluster& cluster_;
    ResourceManager& rm_;
    CoordStore& store_;
    AgentHooks hooks_;
    SessionId session_;
    std::set<std::string> targets_ever_;           // DataNodes ever written to
    std::map<std::string, std::string> last_written_;
    std::set<std::string> created_;                // znodes this agent created
    std::set<std::string> detected_keys_;
    std::int64_t store_writes_ = 0;
    std::int64_t submit_failures_ = 0;
};

/*
 * DataNodeAgent: TrafficControlDataCollector + TrafficControlExecutor for
 * one DataNode host. Registers /tcData/DN_<id> at startup, then maintains a
 * children watch on it and a data watch on every child. Every watch event
 * triggers a refresh that re-arms the watches and unconditionally re-reads,
 * so a change landing between notification and re-read is never lost. The
 * executor applies the diff to the host's shaper; one shape class per pipe,
 * named by the pipe key rendering.
 */
class DataNodeAgent {
public:
    static constexpr int kFilterPriority = 10;

    DataNodeAgent(std::string dn_id, CoordStore& store, TrafficShaper& shaper,
                  AgentHooks hooks = {});

    void start(SimTime now);  // registers znodes and arms the first watches
    void refresh(SimTime now);

    void execute(const std::vector<TrafficEvent>& events, SimTime now);

    const std::map<std::string, std::vector<RateSetting>>& previous() const {
        return previous_;
    }
    std::int64_t parse_failures() const { return parse_failures_; }
    std::int64_t executor_skips() const { return executor_skips_; }
    SessionId session() const { return session_; }

private:
    std::string dn_id_;
    CoordStore& store_;
    TrafficShaper& shaper_;
    AgentHooks hooks_;
    SessionId session_;
    std::map<std::string, std::vector<RateSetting>> previous_;  // per NM child name
    std::int64_t parse_failures_ = 0;
    std::int64_t executor_skips_ = 0;
};

}  // namespace piperate
