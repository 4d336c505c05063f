#include "piperate/resource_manager.hpp"

namespace piperate {

const char* to_string(Dimension d) {
    switch (d) {
        case Dimension::vcores: return "vcores";
        case Dimension::memory: return "memory";
        case Dimension::io_rate: return "io_rate";
    }
    return "?";
}

const char* to_string(RmError e) {
    switch (e) {
        case RmError::no_such_class: return "no_such_class";
        case RmError::no_such_host: return "no_such_host";
        case RmError::duplicate_container: return "duplicate_container";
        case RmError::invalid_state: return "invalid_state";
    }
    return "?";
}

void ResourceManager::add_class(const std::string& class_name, ResourceSpec spec) {
    classes_[class_name] = spec;
}

void ResourceManager::add_host(const std::string& host, ResourceSpec capacity) {
    hosts_[host] = capacity;
}

Result<ResourceManager::AdmitDecision, RmError> ResourceManager::admit(
    const std::string& container_id, const std::string& class_name, const std::string& host) {
    auto cit = classes_.find(class_name);
    if (cit == classes_.end()) return RmError::no_such_class;
    auto hit = hosts_.find(host);
    if (hit == hosts_.end()) return RmError::no_such_host;
    if (allocations_.count(container_id)) return RmError::duplicate_container;

    const ResourceSpec would_use = host_usage(host) + cit->second;
    const ResourceSpec& cap = hit->second;
    AdmitDecision decision;
    if (would_use.vcores > cap.vcores) {
        decision.reject_reason = Dimension::vcores;
    } else if (would_use.memory > cap.memory) {
        decision.reject_reason = Dimension::memory;
    } else if (would_use.io_rate > cap.io_rate) {
        decision.reject_reason = Dimension::io_rate;
    } else {
        decision.accepted = true;
        allocations_[container_id] = Allocation{host, class_name, AllocationState::requested};
    }
    return decision;
}

Result<void, RmError> ResourceManager::start_container(const std::string& container_id) {
    auto it = allocations_.find(container_id);
    if (it == allocations_.end() || it->second.state != AllocationState::requested)
        return RmError::invalid_state;
    it->second.state = AllocationState::running;
    return {};
}

Result<void, RmError> ResourceManager::finish_container(const std::string& container_id) {
    auto it = allocations_.find(container_id);
    if (it == allocations_.end() || it->second.state != AllocationState::running)
        return RmError::invalid_state;
    it->second.state = AllocationState::finished;
    return {};
}

std::optional<ResourceManager::RegistryEntry> ResourceManager::registry_lookup(
    const std::string& container_id) const {
    auto it = allocations_.find(container_id);
    if (it == allocations_.end() || it->second.state != AllocationState::running)
        return std::nullopt;
    return RegistryEntry{it->second.class_name, classes_.at(it->second.class_name).io_rate};
}

std::optional<AllocationState> ResourceManager::allocation_state(
    const std::string& container_id) const {
    auto it = allocations_.find(container_id);
    if (it == allocations_.end()) return std::nullopt;
    return it->second.state;
}

ResourceSpec ResourceManager::host_capacity(const std::string& host) const {
    auto it = hosts_.find(host);
    return it == hosts_.end() ? ResourceSpec{} : it->second;
}

ResourceSpec ResourceManager::host_usage(const std::string& host) const {
    ResourceSpec used;
    for (const auto& [id, alloc] : allocations_) {
        if (alloc.host != host) continue;
        if (alloc.state == AllocationState::finished) continue;
        used += classes_.at(alloc.class_name);
    }
    return used;
}

bool ResourceManager::never_oversubscribed() const {
    for (const auto& [host, cap] : hosts_)
        if (!host_usage(host).fits_within(cap)) return false;
    return true;
}

}  // namespace piperate
