#include "piperate/coordstore.hpp"

#include <algorithm>

namespace piperate {

std::optional<ZPath> ZPath::parse(const std::string& text) {
    if (text.empty() || text[0] != '/') return std::nullopt;
    ZPath p;
    if (text == "/") return p;
    if (text.back() == '/') return std::nullopt;
    std::size_t pos = 1;
    while (pos <= text.size()) {
        std::size_t next = text.find('/', pos);
        if (next == std::string::npos) next = text.size();
        if (next == pos) return std::nullopt;  // empty segment
        p.segments_.push_back(text.substr(pos, next - pos));
        pos = next + 1;
    }
    return p;
}

ZPath ZPath::child(const std::string& segment) const {
    ZPath p = *this;
    p.segments_.push_back(segment);
    return p;
}

ZPath ZPath::parent() const {
    ZPath p = *this;
    if (!p.segments_.empty()) p.segments_.pop_back();
    return p;
}

std::string ZPath::render() const {
    if (segments_.empty()) return "/";
    std::string out;
    for (const auto& s : segments_) {
        out += '/';
        out += s;
    }
    return out;
}

const char* to_string(StoreError e) {
    switch (e) {
        case StoreError::no_such_session: return "no_such_session";
        case StoreError::no_parent: return "no_parent";
        case StoreError::node_exists: return "node_exists";
        case StoreError::ephemeral_parent: return "ephemeral_parent";
        case StoreError::no_such_node: return "no_such_node";
        case StoreError::not_empty: return "not_empty";
    }
    return "?";
}

const char* to_string(WatchKind k) {
    switch (k) {
        case WatchKind::data_changed: return "data_changed";
        case WatchKind::node_created: return "node_created";
        case WatchKind::node_deleted: return "node_deleted";
        case WatchKind::children_changed: return "children_changed";
    }
    return "?";
}

CoordStore::CoordStore(EventEngine& engine, SimTime watch_latency)
    : engine_(engine), watch_latency_(watch_latency) {
    nodes_["/"] = Node{};
}

SessionId CoordStore::open_session(WatchHandler handler) {
    SessionId id{next_session_++};
    sessions_[id.value] = Session{std::move(handler), {}};
    return id;
}

bool CoordStore::session_live(SessionId session) const {
    return sessions_.count(session.value) != 0;
}

void CoordStore::emit(SessionId target, WatchKind kind, const std::string& path) {
    WatchEvent ev{kind, path, engine_.now() + watch_latency_};
    engine_.schedule_after(watch_latency_, [this, target, ev] {
        auto it = sessions_.find(target.value);
        if (it == sessions_.end()) return;  // closed before delivery
        if (it->second.handler) it->second.handler(target, ev);
    });
}

void CoordStore::fire_data_watches(const std::string& path, WatchKind kind) {
    auto it = data_watches_.find(path);
    if (it == data_watches_.end()) return;
    std::vector<SessionId> regs = std::move(it->second);
    data_watches_.erase(it);
    for (SessionId s : regs) emit(s, kind, path);
}

void CoordStore::fire_child_watches(const std::string& path) {
    auto it = child_watches_.find(path);
    if (it == child_watches_.end()) return;
    std::vector<SessionId> regs = std::move(it->second);
    child_watches_.erase(it);
    for (SessionId s : regs) emit(s, WatchKind::children_changed, path);
}

Result<std::int64_t, StoreError> CoordStore::create(SessionId session, const ZPath& path,
                                                    std::string data, NodeMode mode) {
    if (!session_live(session)) return StoreError::no_such_session;
    const std::string rendered = path.render();
    if (path.is_root() || nodes_.count(rendered)) return StoreError::node_exists;
    const std::string parent = path.parent().render();
    auto pit = nodes_.find(parent);
    if (pit == nodes_.end()) return StoreError::no_parent;
    if (pit->second.mode == NodeMode::ephemeral) return StoreError::ephemeral_parent;

    Node node;
    node.data = std::move(data);
    node.mode = mode;
    if (mode == NodeMode::ephemeral) {
        node.owner = session;
        sessions_[session.value].ephemerals.insert(rendered);
    }
    nodes_[rendered] = std::move(node);
    pit->second.children.insert(path.leaf());
    fire_child_watches(parent);
    return std::int64_t{0};
}

Result<std::int64_t, StoreError> CoordStore::set_data(SessionId session, const ZPath& path,
                                                      std::string data) {
    if (!session_live(session)) return StoreError::no_such_session;
    auto it = nodes_.find(path.render());
    if (it == nodes_.end()) return StoreError::no_such_node;
    it->second.data = std::move(data);
    it->second.version += 1;
    fire_data_watches(path.render(), WatchKind::data_changed);
    return it->second.version;
}

Result<CoordStore::DataVersion, StoreError> CoordStore::get_data(SessionId session,
                                                                 const ZPath& path,
                                                                 bool register_watch) {
    if (!session_live(session)) return StoreError::no_such_session;
    auto it = nodes_.find(path.render());
    if (it == nodes_.end()) return StoreError::no_such_node;
    if (register_watch) {
        auto& regs = data_watches_[path.render()];
        if (std::find(regs.begin(), regs.end(), session) == regs.end())
            regs.push_back(session);
    }
    return DataVersion{it->second.data, it->second.version};
}

Result<std::vector<std::string>, StoreError> CoordStore::get_children(SessionId session,
                                                                      const ZPath& path,
                                                                      bool register_watch) {
    if (!session_live(session)) return StoreError::no_such_session;
    auto it = nodes_.find(path.render());
    if (it == nodes_.end()) return StoreError::no_such_node;
    if (register_watch) {
        auto& regs = child_watches_[path.render()];
        if (std::find(regs.begin(), regs.end(), session) == regs.end())
            regs.push_back(session);
    }
    // std::set iterates lexicographically already.
    return std::vector<std::string>(it->second.children.begin(), it->second.children.end());
}

void CoordStore::remove_node_internal(const std::string& rendered, const ZPath& path) {
    auto it = nodes_.find(rendered);
    if (it->second.owner) {
        auto sit = sessions_.find(it->second.owner->value);
        if (sit != sessions_.end()) sit->second.ephemerals.erase(rendered);
    }
    nodes_.erase(it);
    const std::string parent = path.parent().render();
    auto pit = nodes_.find(parent);
    if (pit != nodes_.end()) pit->second.children.erase(path.leaf());
    fire_data_watches(rendered, WatchKind::node_deleted);
    // Children watches on the removed node are dropped unfired; only its data
    // watchers and the parent's children watchers are notified.
    child_watches_.erase(rendered);
    fire_child_watches(parent);
}

Result<void, StoreError> CoordStore::remove(SessionId session, const ZPath& path) {
    if (!session_live(session)) return StoreError::no_such_session;
    const std::string rendered = path.render();
    auto it = nodes_.find(rendered);
    if (it == nodes_.end()) return StoreError::no_such_node;
    // The root anchors the tree and is treated as permanently non-empty.
    if (!it->second.children.empty() || path.is_root()) return StoreError::not_empty;
    remove_node_internal(rendered, path);
    return {};
}

Result<void, StoreError> CoordStore::close_session(SessionId session) {
    auto sit = sessions_.find(session.value);
    if (sit == sessions_.end()) return StoreError::no_such_session;

    // Unfired registrations die with the session, before any ephemeral
    // cleanup, so a session never sees its own teardown.
    for (auto& [path, regs] : data_watches_)
        regs.erase(std::remove(regs.begin(), regs.end(), session), regs.end());
    for (auto& [path, regs] : child_watches_)
        regs.erase(std::remove(regs.begin(), regs.end(), session), regs.end());

    // Ephemerals are removed in lexicographic path order, each firing the
    // same events as an explicit delete.
    std::vector<std::string> owned(sit->second.ephemerals.begin(),
                                   sit->second.ephemerals.end());
    for (const auto& rendered : owned) {
        auto parsed = ZPath::parse(rendered);
        remove_node_internal(rendered, *parsed);
    }
    sessions_.erase(session.value);
    return {};
}

bool CoordStore::node_exists(const ZPath& path) const {
    return nodes_.count(path.render()) != 0;
}

}  // namespace piperate
