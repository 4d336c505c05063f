#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "piperate/event_engine.hpp"
#include "piperate/result.hpp"
#include "piperate/sim_time.hpp"

namespace piperate {

/*
 * CoordStore
 *
 * In-process coordination service with the semantics the control agents
 * rely on: a hierarchical tree of znodes with atomic whole-value data,
 * persistent/ephemeral lifetime, per-session ownership, and one-time
 * watches on data and children. Watch events are never delivered
 * re-entrantly: each firing is scheduled on the event engine and arrives
 * watch_latency later, in fire order.
 */

// Hierarchical path. Root is the empty segment list and renders as "/";
// every segment is non-empty and contains no '/'.
class ZPath {
public:
    ZPath() = default;

    static std::optional<ZPath> parse(const std::string& text);
    static ZPath root() { return ZPath(); }

    ZPath child(const std::string& segment) const;
    ZPath parent() const;

    bool is_root() const { return segments_.empty(); }
    const std::string& leaf() const { return segments_.back(); }
    std::string render() const;

    bool operator==(const ZPath& other) const = default;

private:
    std::vector<std::string> segments_;
};

enum class NodeMode { persistent, ephemeral };

enum class StoreError {
    no_such_session,
    no_parent,
    node_exists,
    ephemeral_parent,
    no_such_node,
    not_empty,
};

const char* to_string(StoreError e);

enum class WatchKind { data_changed, node_created, node_deleted, children_changed };

const char* to_string(WatchKind k);

struct WatchEvent {
    WatchKind kind;
    std::string path;       // rendered
    SimTime delivery_time;  // fire time + watch latency

    bool operator==(const WatchEvent& other) const = default;
};

struct SessionId {
    std::uint64_t value = 0;
    auto operator<=>(const SessionId&) const = default;
};

using WatchHandler = std::function<void(SessionId, const WatchEvent&)>;

class CoordStore {
public:
    CoordStore(EventEngine& engine, SimTime watch_latency);

    // Sessions. The handler receives this session's watch events; it may be
    // empty for sessions that never arm watches.
    SessionId open_session(WatchHandler handler = {});
    Result<void, StoreError> close_session(SessionId session);
    bool session_live(SessionId session) const;

    // Node operations. Error precedence, mirrored by the test reference
    // model: session liveness first, then path-shape preconditions in the
    // order listed per operation.
    Result<std::int64_t, StoreError> create(SessionId session, const ZPath& path,
                                            std::string data, NodeMode mode);
    Result<std::int64_t, StoreError> set_data(SessionId session, const ZPath& path,
                                              std::string data);

    struct DataVersion {
        std::string data;
        std::int64_t version;
        bool operator==(const DataVersion&) const = default;
    };
    Result<DataVersion, StoreError> get_data(SessionId session, const ZPath& path,
                                             bool register_watch);
    Result<std::vector<std::string>, StoreError> get_children(SessionId session,
                                                              const ZPath& path,
                                                              bool register_watch);
    // delete() in the coordination-service sense; named remove to keep the
    // keyword free.
    Result<void, StoreError> remove(SessionId session, const ZPath& path);

    bool node_exists(const ZPath& path) const;
    SimTime watch_latency() const { return watch_latency_; }

private:
    struct Node {
        std::string data;
        NodeMode mode = NodeMode::persistent;
        std::optional<SessionId> owner;
        std::int64_t version = 0;
        std::set<std::string> children;
    };

    struct Session {
        WatchHandler handler;
        std::set<std::string> ephemerals;  // rendered paths
    };

    void fire_data_watches(const std::string& path, WatchKind kind);
    void fire_child_watches(const std::string& path);
    void emit(SessionId target, WatchKind kind, const std::string& path);
    void remove_node_internal(const std::string& rendered, const ZPath& path);

    EventEngine& engine_;
    SimTime watch_latency_;
    std::uint64_t next_session_ = 1;
    std::map<std::uint64_t, Session> sessions_;
    std::map<std::string, Node> nodes_;  // keyed by rendered path
    // One-time watch registrations, in registration order, deduplicated per
    // (path, session).
    std::map<std::string, std::vector<SessionId>> data_watches_;
    std::map<std::string, std::vector<SessionId>> child_watches_;
};

}  // namespace piperate
