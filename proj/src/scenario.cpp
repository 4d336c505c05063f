#include "piperate/scenario.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace piperate {

namespace {

using nlohmann::json;

struct ParseError {
    std::string message;
};

void expect_fields(const json& obj, const std::string& where,
                   const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            throw ParseError{"unknown field '" + key + "' in " + where};
    }
}

std::string name_ok(const std::string& s) {
    if (s.empty()) return "empty";
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
        if (!ok) return std::string("contains '") + c + "'";
    }
    return "";
}

std::int64_t get_int(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) throw ParseError{where + ": missing field '" + key + "'"};
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ParseError{where + ": field '" + key + "' must be an integer"};
    return v.get<std::int64_t>();
}

double get_number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) throw ParseError{where + ": missing field '" + key + "'"};
    const json& v = obj.at(key);
    if (!v.is_number()) throw ParseError{where + ": field '" + key + "' must be a number"};
    return v.get<double>();
}

std::string get_string(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) throw ParseError{where + ": missing field '" + key + "'"};
    const json& v = obj.at(key);
    if (!v.is_string()) throw ParseError{where + ": field '" + key + "' must be a string"};
    return v.get<std::string>();
}

bool get_bool(const json& obj, const std::string& where, const std::string& key,
              bool fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw ParseError{where + ": missing field '" + key + "'"};
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ParseError{where + ": field '" + key + "' must be a boolean"};
    return v.get<bool>();
}

ScenarioConfig parse(const json& root) {
    if (!root.is_object()) throw ParseError{"scenario root must be an object"};
    expect_fields(root, "scenario",
                  {"machines", "files", "container_classes", "container_requests",
                   "shaping_enabled", "parameters"});

    ScenarioConfig cfg;

    for (const auto& req : {"machines", "files", "container_classes", "container_requests"}) {
        if (!root.contains(req)) throw ParseError{std::string("missing field '") + req + "'"};
        if (!root.at(req).is_array())
            throw ParseError{std::string("field '") + req + "' must be an array"};
    }

    std::size_t i = 0;
    for (const auto& m : root.at("machines")) {
        const std::string where = "machines[" + std::to_string(i++) + "]";
        expect_fields(m, where,
                      {"host", "vcores", "memory", "disks", "runs_datanode",
                       "runs_nodemanager", "nic_cap"});
        MachineConfig mc;
        mc.host = get_string(m, where, "host");
        mc.vcores = get_int(m, where, "vcores");
        mc.memory = get_int(m, where, "memory");
        mc.runs_datanode = get_bool(m, where, "runs_datanode", false);
        mc.runs_nodemanager = get_bool(m, where, "runs_nodemanager", false);
        if (m.contains("nic_cap")) mc.nic_cap = get_int(m, where, "nic_cap");
        if (!m.contains("disks") || !m.at("disks").is_array())
            throw ParseError{where + ": field 'disks' must be an array"};
        std::size_t j = 0;
        for (const auto& d : m.at("disks")) {
            const std::string dwhere = where + ".disks[" + std::to_string(j++) + "]";
            expect_fields(d, dwhere, {"disk_id", "capacity"});
            DiskConfig dc;
            dc.disk_id = get_string(d, dwhere, "disk_id");
            dc.capacity = get_int(d, dwhere, "capacity");
            mc.disks.push_back(std::move(dc));
        }
        cfg.machines.push_back(std::move(mc));
    }

    i = 0;
    for (const auto& f : root.at("files")) {
        const std::string where = "files[" + std::to_string(i++) + "]";
        expect_fields(f, where, {"name", "blocks"});
        FileConfig fc;
        fc.name = get_string(f, where, "name");
        if (!f.contains("blocks") || !f.at("blocks").is_array())
            throw ParseError{where + ": field 'blocks' must be an array"};
        std::size_t j = 0;
        for (const auto& b : f.at("blocks")) {
            const std::string bwhere = where + ".blocks[" + std::to_string(j++) + "]";
            expect_fields(b, bwhere, {"block_id", "size", "replicas"});
            BlockConfig bc;
            bc.block_id = get_string(b, bwhere, "block_id");
            bc.size = get_int(b, bwhere, "size");
            if (!b.contains("replicas") || !b.at("replicas").is_array())
                throw ParseError{bwhere + ": field 'replicas' must be an array"};
            std::size_t k = 0;
            for (const auto& r : b.at("replicas")) {
                const std::string rwhere = bwhere + ".replicas[" + std::to_string(k++) + "]";
                expect_fields(r, rwhere, {"host", "disk_id"});
                bc.replicas.push_back(ReplicaLocation{get_string(r, rwhere, "host"),
                                                      get_string(r, rwhere, "disk_id")});
            }
            fc.blocks.push_back(std::move(bc));
        }
        cfg.files.push_back(std::move(fc));
    }

    i = 0;
    for (const auto& c : root.at("container_classes")) {
        const std::string where = "container_classes[" + std::to_string(i++) + "]";
        expect_fields(c, where, {"class_name", "vcores", "memory", "io_rate"});
        ContainerClassConfig cc;
        cc.class_name = get_string(c, where, "class_name");
        cc.vcores = get_int(c, where, "vcores");
        cc.memory = get_int(c, where, "memory");
        cc.io_rate = get_int(c, where, "io_rate");
        cfg.container_classes.push_back(std::move(cc));
    }

    i = 0;
    for (const auto& r : root.at("container_requests")) {
        const std::string where = "container_requests[" + std::to_string(i++) + "]";
        expect_fields(r, where, {"container_id", "class_name", "host", "start_time", "file"});
        ContainerRequestConfig rc;
        rc.container_id = get_string(r, where, "container_id");
        rc.class_name = get_string(r, where, "class_name");
        rc.host = get_string(r, where, "host");
        rc.start_time = from_seconds(get_number(r, where, "start_time"));
        rc.file = get_string(r, where, "file");
        cfg.container_requests.push_back(std::move(rc));
    }

    cfg.shaping_enabled = get_bool(root, "scenario", "shaping_enabled", true);

    if (root.contains("parameters")) {
        const json& p = root.at("parameters");
        expect_fields(p, "parameters",
                      {"dt", "poll_interval", "watch_latency", "aimd_increase", "aimd_beta",
                       "sim_duration", "seed"});
        Parameters& par = cfg.parameters;
        if (p.contains("dt")) par.dt = from_seconds(get_number(p, "parameters", "dt"));
        if (p.contains("poll_interval"))
            par.poll_interval = from_seconds(get_number(p, "parameters", "poll_interval"));
        if (p.contains("watch_latency"))
            par.watch_latency = from_seconds(get_number(p, "parameters", "watch_latency"));
        if (p.contains("aimd_increase"))
            par.aimd_increase = get_int(p, "parameters", "aimd_increase");
        if (p.contains("aimd_beta")) par.aimd_beta = get_number(p, "parameters", "aimd_beta");
        if (p.contains("sim_duration"))
            par.sim_duration = from_seconds(get_number(p, "parameters", "sim_duration"));
        if (p.contains("seed")) par.seed = get_int(p, "parameters", "seed");
    }
    if (cfg.parameters.sim_duration == 0)
        throw ParseError{"parameters.sim_duration is required"};
    return cfg;
}

}  // namespace

Result<void, std::string> validate_scenario(const ScenarioConfig& cfg) {
    std::set<std::string> hosts;
    for (std::size_t i = 0; i < cfg.machines.size(); ++i) {
        const MachineConfig& m = cfg.machines[i];
        const std::string where = "machines[" + std::to_string(i) + "]";
        if (auto why = name_ok(m.host); !why.empty())
            return where + ": invalid host name (" + why + ")";
        if (!hosts.insert(m.host).second) return where + ": duplicate host '" + m.host + "'";
        if (m.vcores < 0) return where + ": vcores must be >= 0";
        if (m.memory < 0) return where + ": memory must be >= 0";
        if (m.nic_cap < 0) return where + ": nic_cap must be >= 0";
        std::set<std::string> disk_ids;
        for (const DiskConfig& d : m.disks) {
            if (auto why = name_ok(d.disk_id); !why.empty())
                return where + ": invalid disk_id (" + why + ")";
            if (!disk_ids.insert(d.disk_id).second)
                return where + ": duplicate disk_id '" + d.disk_id + "'";
            if (d.capacity <= 0)
                return where + ": disk '" + d.disk_id + "' capacity must be > 0";
        }
        if (m.runs_datanode && m.disks.empty())
            return where + ": runs_datanode requires at least one disk";
    }

    auto find_machine = [&](const std::string& host) -> const MachineConfig* {
        for (const auto& m : cfg.machines)
            if (m.host == host) return &m;
        return nullptr;
    };

    std::set<std::string> file_names;
    std::set<std::string> block_ids;
    for (const FileConfig& f : cfg.files) {
        if (auto why = name_ok(f.name); !why.empty())
            return "file '" + f.name + "': invalid name (" + why + ")";
        if (!file_names.insert(f.name).second) return "duplicate file '" + f.name + "'";
        if (f.blocks.empty()) return "file '" + f.name + "' has no blocks";
        for (const BlockConfig& b : f.blocks) {
            if (auto why = name_ok(b.block_id); !why.empty())
                return "file '" + f.name + "': invalid block_id (" + why + ")";
            if (!block_ids.insert(b.block_id).second)
                return "duplicate block_id '" + b.block_id + "'";
            if (b.size <= 0) return "block '" + b.block_id + "': size must be > 0";
            if (b.replicas.empty()) return "block '" + b.block_id + "' has no replicas";
            for (const ReplicaLocation& r : b.replicas) {
                const MachineConfig* m = find_machine(r.host);
                if (!m) return "block '" + b.block_id + "': replica host '" + r.host +
                               "' does not exist";
                if (!m->runs_datanode)
                    return "block '" + b.block_id + "': replica host '" + r.host +
                           "' runs no DataNode";
                bool disk_found = false;
                for (const DiskConfig& d : m->disks) disk_found |= (d.disk_id == r.disk_id);
                if (!disk_found)
                    return "block '" + b.block_id + "': replica disk '" + r.disk_id +
                           "' not on host '" + r.host + "'";
            }
        }
    }

    std::set<std::string> class_names;
    for (const ContainerClassConfig& c : cfg.container_classes) {
        if (auto why = name_ok(c.class_name); !why.empty())
            return "container class '" + c.class_name + "': invalid name (" + why + ")";
        if (!class_names.insert(c.class_name).second)
            return "duplicate container class '" + c.class_name + "'";
        if (c.vcores < 0 || c.memory < 0 || c.io_rate < 0)
            return "container class '" + c.class_name + "': negative resource";
    }

    std::set<std::string> container_ids;
    SimTime max_start = 0;
    for (const ContainerRequestConfig& r : cfg.container_requests) {
        if (auto why = name_ok(r.container_id); !why.empty())
            return "container '" + r.container_id + "': invalid id (" + why + ")";
        if (!container_ids.insert(r.container_id).second)
            return "duplicate container_id '" + r.container_id + "'";
        if (!class_names.count(r.class_name))
            return "container '" + r.container_id + "': unknown class '" + r.class_name + "'";
        const MachineConfig* m = find_machine(r.host);
        if (!m) return "container '" + r.container_id + "': unknown host '" + r.host + "'";
        if (!m->runs_nodemanager)
            return "container '" + r.container_id + "': host '" + r.host +
                   "' runs no NodeManager";
        if (!file_names.count(r.file))
            return "container '" + r.container_id + "': unknown file '" + r.file + "'";
        if (r.start_time < 0) return "container '" + r.container_id + "': start_time < 0";
        max_start = std::max(max_start, r.start_time);
    }

    const Parameters& p = cfg.parameters;
    if (p.dt <= 0) return "parameters.dt must be > 0";
    if (p.poll_interval <= 0) return "parameters.poll_interval must be > 0";
    if (p.watch_latency < 0) return "parameters.watch_latency must be >= 0";
    if (p.aimd_increase <= 0) return "parameters.aimd_increase must be > 0";
    if (!(p.aimd_beta > 0 && p.aimd_beta < 1))
        return "parameters.aimd_beta must be in (0, 1)";
    if (p.sim_duration <= 0) return "parameters.sim_duration must be > 0";
    if (!cfg.container_requests.empty() && p.sim_duration <= max_start)
        return "parameters.sim_duration must exceed the largest start_time";
    return {};
}

Result<ScenarioConfig, std::string> load_scenario_string(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        return std::string("JSON parse error: ") + e.what();
    }
    ScenarioConfig cfg;
    try {
        cfg = parse(root);
    } catch (const ParseError& e) {
        return e.message;
    }
    if (auto v = validate_scenario(cfg); !v.ok()) return v.error();
    return cfg;
}

Result<ScenarioConfig, std::string> load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "cannot open scenario file '" + path + "'";
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario_string(buf.str());
}

Result<void, std::string> apply_override(ScenarioConfig& cfg, const std::string& key,
                                         const std::string& value) {
    auto parse_int = [&](std::int64_t& out) -> bool {
        try {
            std::size_t used = 0;
            out = std::stoll(value, &used);
            return used == value.size();
        } catch (...) {
            return false;
        }
    };
    auto parse_double = [&](double& out) -> bool {
        try {
            std::size_t used = 0;
            out = std::stod(value, &used);
            return used == value.size();
        } catch (...) {
            return false;
        }
    };

    Parameters& p = cfg.parameters;
    if (key == "shaping_enabled") {
        if (value == "true") {
            cfg.shaping_enabled = true;
        } else if (value == "false") {
            cfg.shaping_enabled = false;
        } else {
            return "override shaping_enabled expects true or false";
        }
        return {};
    }
    double d = 0;
    std::int64_t n = 0;
    if (key == "parameters.dt") {
        if (!parse_double(d)) return "override " + key + ": bad number";
        p.dt = from_seconds(d);
    } else if (key == "parameters.poll_interval") {
        if (!parse_double(d)) return "override " + key + ": bad number";
        p.poll_interval = from_seconds(d);
    } else if (key == "parameters.watch_latency") {
        if (!parse_double(d)) return "override " + key + ": bad number";
        p.watch_latency = from_seconds(d);
    } else if (key == "parameters.aimd_increase") {
        if (!parse_int(n)) return "override " + key + ": bad integer";
        p.aimd_increase = n;
    } else if (key == "parameters.aimd_beta") {
        if (!parse_double(d)) return "override " + key + ": bad number";
        p.aimd_beta = d;
    } else if (key == "parameters.sim_duration") {
        if (!parse_double(d)) return "override " + key + ": bad number";
        p.sim_duration = from_seconds(d);
    } else if (key == "parameters.seed") {
        if (!parse_int(n)) return "override " + key + ": bad integer";
        p.seed = n;
    } else {
        return "unknown override key '" + key + "'";
    }
    return {};
}

std::string normalized_scenario_json(const ScenarioConfig& cfg) {
    json root;
    json machines = json::array();
    for (const auto& m : cfg.machines) {
        json disks = json::array();
        for (const auto& d : m.disks)
            disks.push_back({{"disk_id", d.disk_id}, {"capacity", d.capacity}});
        machines.push_back({{"host", m.host},
                            {"vcores", m.vcores},
                            {"memory", m.memory},
                            {"disks", disks},
                            {"runs_datanode", m.runs_datanode},
                            {"runs_nodemanager", m.runs_nodemanager},
                            {"nic_cap", m.nic_cap}});
    }
    root["machines"] = machines;

    json files = json::array();
    for (const auto& f : cfg.files) {
        json blocks = json::array();
        for (const auto& b : f.blocks) {
            json replicas = json::array();
            for (const auto& r : b.replicas)
                replicas.push_back({{"host", r.host}, {"disk_id", r.disk_id}});
            blocks.push_back(
                {{"block_id", b.block_id}, {"size", b.size}, {"replicas", replicas}});
        }
        files.push_back({{"name", f.name}, {"blocks", blocks}});
    }
    root["files"] = files;

    json classes = json::array();
    for (const auto& c : cfg.container_classes)
        classes.push_back({{"class_name", c.class_name},
                           {"vcores", c.vcores},
                           {"memory", c.memory},
                           {"io_rate", c.io_rate}});
    root["container_classes"] = classes;

    json requests = json::array();
    for (const auto& r : cfg.container_requests)
        requests.push_back({{"container_id", r.container_id},
                            {"class_name", r.class_name},
                            {"host", r.host},
                            {"start_time_us", r.start_time},
                            {"file", r.file}});
    root["container_requests"] = requests;

    const Parameters& p = cfg.parameters;
    root["parameters"] = {{"dt_us", p.dt},
                          {"poll_interval_us", p.poll_interval},
                          {"watch_latency_us", p.watch_latency},
                          {"aimd_increase", p.aimd_increase},
                          {"aimd_beta", p.aimd_beta},
                          {"sim_duration_us", p.sim_duration},
                          {"seed", p.seed}};
    return root.dump(2) + "\n";
}

}  // namespace piperate
