#include "piperate/control_agents.hpp"

#include <algorithm>

namespace piperate {

namespace {

// Strict base-10 integer: digits only, no leading zeros (except "0" itself).
bool parse_canonical_int(const std::string& tok, std::int64_t& out) {
    if (tok.empty() || tok.size() > 18) return false;
    if (tok.size() > 1 && tok[0] == '0') return false;
    std::int64_t v = 0;
    for (char c : tok) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

bool parse_endpoint(const std::string& tok, std::string& host, int& port) {
    const std::size_t colon = tok.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size()) return false;
    if (tok.find(':', colon + 1) != std::string::npos) return false;
    std::int64_t p = 0;
    if (!parse_canonical_int(tok.substr(colon + 1), p)) return false;
    if (p < 1 || p > 65535) return false;
    host = tok.substr(0, colon);
    port = static_cast<int>(p);
    return true;
}

}  // namespace

std::string RateSetting::line() const {
    return container_id + " " + key.src_host + ":" + std::to_string(key.src_port) + " " +
           key.dst_host + ":" + std::to_string(key.dst_port) + " " +
           std::to_string(rate_bps) + " " + std::to_string(burst_bytes);
}

std::string serialize_settings(std::vector<RateSetting> settings) {
    std::vector<std::string> lines;
    lines.reserve(settings.size());
    for (const RateSetting& s : settings) lines.push_back(s.line());
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

Result<std::vector<RateSetting>, std::string> parse_settings(const std::string& bytes) {
    std::vector<RateSetting> out;
    if (bytes.empty()) return out;
    if (bytes.back() != '\n') return std::string("missing trailing newline");

    std::set<std::string> seen_keys;
    std::string prev_line;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const std::size_t eol = bytes.find('\n', pos);
        const std::string line = bytes.substr(pos, eol - pos);
        pos = eol + 1;

        std::vector<std::string> tokens;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t sp = line.find(' ', start);
            if (sp == std::string::npos) sp = line.size();
            tokens.push_back(line.substr(start, sp - start));
            start = sp + 1;
        }
        if (tokens.size() != 5) return std::string("expected 5 fields: ") + line;
        for (const std::string& t : tokens)
            if (t.empty()) return std::string("empty field in line: ") + line;

        RateSetting s;
        s.container_id = tokens[0];
        if (!parse_endpoint(tokens[1], s.key.src_host, s.key.src_port))
            return std::string("bad source endpoint: ") + tokens[1];
        if (!parse_endpoint(tokens[2], s.key.dst_host, s.key.dst_port))
            return std::string("bad destination endpoint: ") + tokens[2];
        if (!parse_canonical_int(tokens[3], s.rate_bps) || s.rate_bps <= 0)
            return std::string("bad rate: ") + tokens[3];
        if (!parse_canonical_int(tokens[4], s.burst_bytes) || s.burst_bytes <= 0)
            return std::string("bad burst: ") + tokens[4];

        if (!prev_line.empty() && !(prev_line < line))
            return std::string("lines not in canonical order");
        prev_line = line;
        if (!seen_keys.insert(s.key.render()).second)
            return std::string("duplicate pipe key: ") + s.key.render();
        out.push_back(std::move(s));
    }
    return out;
}

const char* to_string(TrafficEventKind k) {
    switch (k) {
        case TrafficEventKind::remove_rule: return "remove_rule";
        case TrafficEventKind::modify_rule: return "modify_rule";
        case TrafficEventKind::add_rule: return "add_rule";
    }
    return "?";
}

std::vector<TrafficEvent> diff_settings(const std::vector<RateSetting>& old_settings,
                                        const std::vector<RateSetting>& new_settings) {
    std::map<std::string, const RateSetting*> old_by_key, new_by_key;
    for (const RateSetting& s : old_settings) old_by_key[s.key.render()] = &s;
    for (const RateSetting& s : new_settings) new_by_key[s.key.render()] = &s;

    std::vector<TrafficEvent> removes, modifies, adds;
    for (const auto& [key, s] : old_by_key)
        if (!new_by_key.count(key))
            removes.push_back(TrafficEvent{TrafficEventKind::remove_rule, *s});
    for (const auto& [key, s] : new_by_key) {
        auto oit = old_by_key.find(key);
        if (oit == old_by_key.end()) {
            adds.push_back(TrafficEvent{TrafficEventKind::add_rule, *s});
        } else if (oit->second->rate_bps != s->rate_bps ||
                   oit->second->burst_bytes != s->burst_bytes) {
            modifies.push_back(TrafficEvent{TrafficEventKind::modify_rule, *s});
        }
    }
    // The maps iterate in key-render order, so each group is already sorted.
    std::vector<TrafficEvent> out = std::move(removes);
    out.insert(out.end(), modifies.begin(), modifies.end());
    out.insert(out.end(), adds.begin(), adds.end());
    return out;
}

ZPath tc_root_path() { return ZPath::root().child("tcData"); }

ZPath datanode_path(const std::string& dn_id) {
    return tc_root_path().child("DN_" + dn_id);
}

ZPath nodemanager_path(const std::string& dn_id, const std::string& nm_id) {
    return datanode_path(dn_id).child("NM_" + nm_id);
}

NodeManagerAgent::NodeManagerAgent(std::string nm_id, Cluster& cluster, ResourceManager& rm,
                                   CoordStore& store, AgentHooks hooks)
    : nm_id_(std::move(nm_id)),
      cluster_(cluster),
      rm_(rm),
      store_(store),
      hooks_(std::move(hooks)) {
    session_ = store_.open_session();
}

std::map<std::string, std::vector<RateSetting>> NodeManagerAgent::monitor_snapshot(
    SimTime now) {
    std::map<std::string, std::vector<RateSetting>> documents;
    auto table = cluster_.connection_table(nm_id_);
    if (table.ok()) {
        for (const ConnectionRecord& rec : table.value()) {
            auto entry = rm_.registry_lookup(rec.container_id);
            if (!entry || entry->io_rate <= 0) continue;  // no rate class, no setting
            RateSetting s;
            s.container_id = rec.container_id;
            s.key = rec.key;
            s.rate_bps = entry->io_rate;
            // tbf-style default: a 100 ms surge allowance.
            s.burst_bytes = std::max<std::int64_t>(entry->io_rate / 10, 1);
            documents[rec.key.dst_host].push_back(std::move(s));
            if (detected_keys_.insert(rec.key.render()).second && hooks_.on_detected)
                hooks_.on_detected(rec.key, rec.container_id, now);
        }
    }
    // DataNodes written before but absent now get an explicit empty
    // document, which the collector turns into rule removals.
    for (const std::string& dn : targets_ever_)
        if (!documents.count(dn)) documents[dn];
    return documents;
}

void NodeManagerAgent::submit(
    const std::map<std::string, std::vector<RateSetting>>& documents, SimTime now) {
    for (const auto& [dn, settings] : documents) {
        const std::string bytes = serialize_settings(settings);
        auto lit = last_written_.find(dn);
        if (lit != last_written_.end() && lit->second == bytes) continue;

        const ZPath path = nodemanager_path(dn, nm_id_);
        bool ok = false;
        if (!created_.count(dn)) {
            auto res = store_.create(session_, path, bytes, NodeMode::ephemeral);
            ok = res.ok();
            if (ok) created_.insert(dn);
        } else {
            ok = store_.set_data(session_, path, bytes).ok();
        }
        if (!ok) {
            // DataNode not registered (or node lost); retried next tick.
            ++submit_failures_;
            continue;
        }
        ++store_writes_;
        last_written_[dn] = bytes;
        targets_ever_.insert(dn);
        if (hooks_.on_submitted)
            for (const RateSetting& s : settings) hooks_.on_submitted(s.key, now);
    }
}

void NodeManagerAgent::tick(SimTime now) { submit(monitor_snapshot(now), now); }

DataNodeAgent::DataNodeAgent(std::string dn_id, CoordStore& store, TrafficShaper& shaper,
                             AgentHooks hooks)
    : dn_id_(std::move(dn_id)), store_(store), shaper_(shaper), hooks_(std::move(hooks)) {
    session_ = store_.open_session(
        [this](SessionId, const WatchEvent& ev) { refresh(ev.delivery_time); });
}

void DataNodeAgent::start(SimTime now) {
    // /tcData may already exist (any DataNode creates it on first startup).
    store_.create(session_, tc_root_path(), "", NodeMode::persistent);
    store_.create(session_, datanode_path(dn_id_), "", NodeMode::persistent);
    refresh(now);
}

void DataNodeAgent::refresh(SimTime now) {
    const ZPath dn_path = datanode_path(dn_id_);
    auto children = store_.get_children(session_, dn_path, /*register_watch=*/true);
    if (!children.ok()) return;

    std::map<std::string, std::vector<RateSetting>> current;
    for (const std::string& name : children.value()) {
        auto data = store_.get_data(session_, dn_path.child(name), /*register_watch=*/true);
        if (!data.ok()) continue;  // deleted between list and read; next event covers it
        auto parsed = parse_settings(data.value().data);
        if (!parsed.ok()) {
            ++parse_failures_;
            auto pit = previous_.find(name);
            if (pit != previous_.end()) current[name] = pit->second;  // fail safe: keep rules
            continue;
        }
        current[name] = std::move(parsed.value());
    }

    // Children that disappeared (NodeManager session closed) count as empty.
    for (const auto& [name, old_settings] : previous_) {
        std::vector<RateSetting> empty;
        const std::vector<RateSetting>* now_settings = &empty;
        auto cit = current.find(name);
        if (cit != current.end()) now_settings = &cit->second;
        auto events = diff_settings(old_settings, *now_settings);
        if (!events.empty()) execute(events, now);
    }
    for (const auto& [name, now_settings] : current) {
        if (previous_.count(name)) continue;  // handled above
        auto events = diff_settings({}, now_settings);
        if (!events.empty()) execute(events, now);
    }
    previous_ = std::move(current);
}

void DataNodeAgent::execute(const std::vector<TrafficEvent>& events, SimTime now) {
    for (const TrafficEvent& ev : events) {
        const std::string class_id = ev.setting.key.render();
        const double rate = static_cast<double>(ev.setting.rate_bps);
        const double burst = static_cast<double>(ev.setting.burst_bytes);
        switch (ev.kind) {
            case TrafficEventKind::add_rule: {
                const PipePattern pattern = PipePattern::exact(ev.setting.key);
                const auto params = shaper_.class_params(class_id);
                const bool same = params && params->rate_bps == rate &&
                                  params->burst_bytes == burst;
                bool filter_present = false;
                for (const auto& f : shaper_.filters())
                    filter_present |= (f.class_id == class_id && f.pattern == pattern);
                if (!(same && filter_present)) {
                    shaper_.configure_class(class_id, rate, burst);
                    if (!filter_present)
                        shaper_.add_filter(pattern, class_id, kFilterPriority);
                }
                if (hooks_.on_rule_applied)
                    hooks_.on_rule_applied(ev.setting.key, ev.setting.rate_bps, now);
                break;
            }
            case TrafficEventKind::modify_rule: {
                if (!shaper_.has_class(class_id)) {
                    ++executor_skips_;
                    break;
                }
                shaper_.configure_class(class_id, rate, burst);
                if (hooks_.on_rule_applied)
                    hooks_.on_rule_applied(ev.setting.key, ev.setting.rate_bps, now);
                break;
            }
            case TrafficEventKind::remove_rule: {
                if (!shaper_.has_class(class_id)) {
                    ++executor_skips_;
                    break;
                }
                shaper_.remove_filter(PipePattern::exact(ev.setting.key), class_id);
                shaper_.remove_class(class_id);
                break;
            }
        }
    }
}

}  // namespace piperate
