#include "piperate/simcluster.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace piperate {

const char* to_string(SimError e) {
    switch (e) {
        case SimError::no_such_file: return "no_such_file";
        case SimError::no_such_block: return "no_such_block";
        case SimError::no_such_host: return "no_such_host";
        case SimError::container_not_running: return "container_not_running";
    }
    return "?";
}

Result<std::unique_ptr<Cluster>, std::string> Cluster::build(const ScenarioConfig& config) {
    if (auto v = validate_scenario(config); !v.ok()) return v.error();
    auto cluster = std::unique_ptr<Cluster>(new Cluster());
    cluster->params_ = config.parameters;
    for (const MachineConfig& m : config.machines) {
        cluster->machines_[m.host] = m;
        cluster->next_port_[m.host] = kFirstEphemeralPort;
        if (m.runs_datanode) cluster->shapers_[m.host];  // default-construct
    }
    for (const FileConfig& f : config.files) {
        cluster->files_[f.name] = f;
        for (const BlockConfig& b : f.blocks)
            cluster->blocks_[b.block_id] = BlockRef{b.block_id, b.size, b.replicas};
    }
    return cluster;
}

void Cluster::register_container(const std::string& container_id, const std::string& host) {
    containers_[container_id] = ContainerState{host, true};
}

void Cluster::container_finished(const std::string& container_id) {
    auto it = containers_.find(container_id);
    if (it == containers_.end()) return;
    it->second.running = false;
    for (auto& p : pipes_)
        if (p->active && p->container_id == container_id) p->active = false;
}

Result<std::vector<BlockRef>, SimError> Cluster::locate_blocks(const std::string& file) const {
    auto it = files_.find(file);
    if (it == files_.end()) return SimError::no_such_file;
    std::vector<BlockRef> out;
    for (const BlockConfig& b : it->second.blocks)
        out.push_back(BlockRef{b.block_id, b.size, b.replicas});
    return out;
}

std::int64_t Cluster::disk_capacity(const std::string& host, const std::string& disk_id) const {
    const auto& m = machines_.at(host);
    for (const DiskConfig& d : m.disks)
        if (d.disk_id == disk_id) return d.capacity;
    return 0;
}

Result<PipeKey, SimError> Cluster::open_pipe(const std::string& container_id,
                                             const std::string& block_id, SimTime now) {
    auto cit = containers_.find(container_id);
    if (cit == containers_.end() || !cit->second.running)
        return SimError::container_not_running;
    auto bit = blocks_.find(block_id);
    if (bit == blocks_.end()) return SimError::no_such_block;
    const BlockRef& block = bit->second;

    // Replica choice: local DataNode first, otherwise scenario order.
    const ReplicaLocation* chosen = &block.replicas.front();
    for (const ReplicaLocation& r : block.replicas) {
        if (r.host == cit->second.host) {
            chosen = &r;
            break;
        }
    }

    auto pipe = std::make_unique<Pipe>();
    pipe->key = PipeKey{cit->second.host, next_port_.at(cit->second.host)++,
                        chosen->host, kDataNodePort};
    pipe->key_render = pipe->key.render();
    pipe->container_id = container_id;
    pipe->dn_host = chosen->host;
    pipe->disk_id = chosen->disk_id;
    pipe->block_id = block.block_id;
    pipe->block_size = block.size;
    pipe->remaining_bytes = static_cast<double>(block.size);
    pipe->start_time = now;
    pipe->active = true;
    // Greedy start: a fresh sequential block read asks for the whole disk.
    pipe->tcp_demand = static_cast<double>(disk_capacity(chosen->host, chosen->disk_id));
    PipeKey key = pipe->key;
    pipes_.push_back(std::move(pipe));
    return key;
}

Cluster::StepResult Cluster::advance(SimTime now, SimTime dt) {
    assert(dt > 0);
    const double dt_s = to_seconds(dt);
    const double increase = static_cast<double>(params_.aimd_increase) * dt_s;
    const double beta = params_.aimd_beta;

    std::vector<Pipe*> active;
    for (auto& p : pipes_)
        if (p->active) active.push_back(p.get());
    std::sort(active.begin(), active.end(), [](const Pipe* a, const Pipe* b) {
        if (a->start_time != b->start_time) return a->start_time < b->start_time;
        return a->key_render < b->key_render;
    });

    // Per-step byte budgets.
    std::map<std::pair<std::string, std::string>, double> disk_budget;
    std::map<std::string, double> nic_budget;
    for (const auto& [host, m] : machines_) {
        for (const DiskConfig& d : m.disks)
            disk_budget[{host, d.disk_id}] = static_cast<double>(d.capacity) * dt_s;
        if (m.nic_cap > 0) nic_budget[host] = static_cast<double>(m.nic_cap) * dt_s;
    }

    StepResult result;
    for (Pipe* p : active) {
        // Shaper pass: request the full TCP demand against the pipe's class.
        double post_shaper = p->tcp_demand;
        TrafficShaper& sh = shapers_.at(p->dn_host);
        if (auto cls = sh.classify(p->key)) {
            auto granted = sh.grant(*cls, p->tcp_demand * dt_s, now);
            post_shaper = std::min(p->tcp_demand, granted.value() / dt_s);
        }

        // Seniority pass: earlier pipes drain the shared budgets first.
        const double post_shaper_bytes = post_shaper * dt_s;
        double limit = std::min(post_shaper_bytes, p->remaining_bytes);
        double& disk_left = disk_budget.at({p->dn_host, p->disk_id});
        limit = std::min(limit, disk_left);
        auto nit = nic_budget.find(p->key.src_host);
        if (nit != nic_budget.end()) limit = std::min(limit, nit->second);

        const double delivered = limit;
        disk_left -= delivered;
        if (nit != nic_budget.end()) nit->second -= delivered;
        p->remaining_bytes -= delivered;

        if (p->remaining_bytes <= 0) {
            p->remaining_bytes = 0;
            p->active = false;
            result.closed.push_back(p);
        } else if (delivered < post_shaper_bytes) {
            p->tcp_demand *= beta;  // curtailed by disk or NIC contention
        } else if (post_shaper == p->tcp_demand) {
            p->tcp_demand += increase;  // fully served, probe for more
        }
        // else: shaper-clamped and fully served at the clamp; hold steady.

        result.samples.push_back(Sample{p, delivered});
    }
    std::sort(result.samples.begin(), result.samples.end(),
              [](const Sample& a, const Sample& b) {
                  return a.pipe->key_render < b.pipe->key_render;
              });
    return result;
}

Result<std::vector<ConnectionRecord>, SimError> Cluster::connection_table(
    const std::string& host) const {
    if (!machines_.count(host)) return SimError::no_such_host;
    std::vector<ConnectionRecord> out;
    for (const auto& p : pipes_)
        if (p->active && p->key.src_host == host)
            out.push_back(ConnectionRecord{p->key, p->container_id, p->start_time});
    std::sort(out.begin(), out.end(), [](const ConnectionRecord& a, const ConnectionRecord& b) {
        return a.key.render() < b.key.render();
    });
    return out;
}

TrafficShaper& Cluster::shaper(const std::string& dn_host) { return shapers_.at(dn_host); }

const TrafficShaper& Cluster::shaper(const std::string& dn_host) const {
    return shapers_.at(dn_host);
}

std::vector<std::string> Cluster::datanode_hosts() const {
    std::vector<std::string> out;
    for (const auto& [host, m] : machines_)
        if (m.runs_datanode) out.push_back(host);
    return out;
}

std::vector<std::string> Cluster::nodemanager_hosts() const {
    std::vector<std::string> out;
    for (const auto& [host, m] : machines_)
        if (m.runs_nodemanager) out.push_back(host);
    return out;
}

std::vector<const Pipe*> Cluster::active_pipes() const {
    std::vector<const Pipe*> out;
    for (const auto& p : pipes_)
        if (p->active) out.push_back(p.get());
    return out;
}

std::vector<const Pipe*> Cluster::all_pipes() const {
    std::vector<const Pipe*> out;
    for (const auto& p : pipes_) out.push_back(p.get());
    return out;
}

const MachineConfig* Cluster::machine(const std::string& host) const {
    auto it = machines_.find(host);
    return it == machines_.end() ? nullptr : &it->second;
}

}  // namespace piperate
