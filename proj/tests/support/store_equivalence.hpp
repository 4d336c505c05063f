#pragma once

// Drives random operation sequences against CoordStore and ReferenceStore in
// lockstep and compares every return value, error, and delivered event.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "piperate/coordstore.hpp"
#include "piperate/event_engine.hpp"
#include "reference_store.hpp"

namespace piperate::testsupport {

inline std::vector<std::string> equivalence_path_pool() {
    std::vector<std::string> pool = {"/"};
    for (const char* a : {"a", "b", "c", "d"}) pool.push_back(std::string("/") + a);
    for (const char* a : {"a", "b"})
        for (const char* b : {"x", "y", "z"})
            pool.push_back(std::string("/") + a + "/" + b);
    for (const char* c : {"p", "q"}) pool.push_back(std::string("/a/x/") + c);
    return pool;
}

struct EquivalenceOutcome {
    bool ok = true;
    std::string detail;
};

// One random sequence; returns a mismatch description on failure.
inline EquivalenceOutcome run_equivalence_sequence(std::uint64_t seed, int op_count,
                                                   SimTime latency = 10'000) {
    std::mt19937_64 rng(seed);
    const std::vector<std::string> pool = equivalence_path_pool();

    EventEngine engine;
    CoordStore store(engine, latency);
    ReferenceStore model;
    std::map<std::uint64_t, std::vector<RefEvent>> store_delivered;

    auto handler = [&store_delivered](SessionId sid, const WatchEvent& ev) {
        store_delivered[sid.value].push_back(RefEvent{ev.kind, ev.path});
    };

    std::vector<SessionId> sessions;
    auto open_both = [&] {
        SessionId sid = store.open_session(handler);
        std::uint64_t mid = model.open_session();
        sessions.push_back(sid);
        return sid.value == mid;
    };
    if (!open_both()) return {false, "session id mismatch at open"};

    auto pick_session = [&] {
        return sessions[std::uniform_int_distribution<std::size_t>(0, sessions.size() - 1)(rng)];
    };
    auto pick_path = [&] {
        return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    };

    auto render_store = [](auto&& result) -> std::string {
        if (!result.ok()) return std::string("err ") + to_string(result.error());
        return "ok";
    };

    for (int i = 0; i < op_count; ++i) {
        const int op = std::uniform_int_distribution<int>(0, 99)(rng);
        SessionId sid = pick_session();
        const std::string path = pick_path();
        const ZPath zpath = *ZPath::parse(path);
        std::string got, want;

        if (op < 5) {
            if (sessions.size() < 8 && !open_both())
                return {false, "session id mismatch at open"};
            continue;
        } else if (op < 12) {
            got = render_store(store.close_session(sid));
            want = model.close_session(sid.value);
        } else if (op < 40) {
            const bool ephemeral = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
            const std::string data = "d" + std::to_string(i);
            auto r = store.create(sid, zpath, data,
                                  ephemeral ? NodeMode::ephemeral : NodeMode::persistent);
            got = r.ok() ? "ok v=" + std::to_string(r.value())
                         : std::string("err ") + to_string(r.error());
            want = model.create(sid.value, path, data, ephemeral);
        } else if (op < 58) {
            const std::string data = "s" + std::to_string(i);
            auto r = store.set_data(sid, zpath, data);
            got = r.ok() ? "ok v=" + std::to_string(r.value())
                         : std::string("err ") + to_string(r.error());
            want = model.set_data(sid.value, path, data);
        } else if (op < 72) {
            const bool watch = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
            auto r = store.get_data(sid, zpath, watch);
            got = r.ok() ? "ok data=" + r.value().data + " v=" +
                               std::to_string(r.value().version)
                         : std::string("err ") + to_string(r.error());
            want = model.get_data(sid.value, path, watch);
        } else if (op < 84) {
            const bool watch = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
            auto r = store.get_children(sid, zpath, watch);
            if (r.ok()) {
                std::string rendered = "ok [";
                for (const std::string& c : r.value()) rendered += c + ",";
                got = rendered + "]";
            } else {
                got = std::string("err ") + to_string(r.error());
            }
            want = model.get_children(sid.value, path, watch);
        } else if (op < 94) {
            got = render_store(store.remove(sid, zpath));
            want = model.remove(sid.value, path);
        } else {
            engine.run_until(engine.now() + latency);
            model.drain();
            continue;
        }

        if (got != want) {
            std::ostringstream why;
            why << "seed " << seed << " op " << i << " path " << path << ": store '" << got
                << "' vs model '" << want << "'";
            return {false, why.str()};
        }
    }

    engine.run_until(engine.now() + latency);
    model.drain();

    // Per-session event logs must match in content and order.
    for (const auto& [sid, events] : model.delivered()) {
        const auto it = store_delivered.find(sid);
        const std::vector<RefEvent> empty;
        const auto& got_events = it == store_delivered.end() ? empty : it->second;
        if (got_events != events) {
            std::ostringstream why;
            why << "seed " << seed << ": event log mismatch for session " << sid << " (store "
                << got_events.size() << " events, model " << events.size() << ")";
            return {false, why.str()};
        }
    }
    for (const auto& [sid, events] : store_delivered) {
        if (!events.empty() && !model.delivered().count(sid)) {
            std::ostringstream why;
            why << "seed " << seed << ": store delivered to session " << sid
                << " but model did not";
            return {false, why.str()};
        }
    }
    return {};
}

}  // namespace piperate::testsupport
