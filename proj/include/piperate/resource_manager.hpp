#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "piperate/result.hpp"

namespace piperate {

// Container resource demand across the three accounted dimensions. io_rate
// (bytes/second of disk throughput) is the dimension the stock vcores+memory
// resource vector lacks.
struct ResourceSpec {
    std::int64_t vcores = 0;
    std::int64_t memory = 0;   // bytes
    std::int64_t io_rate = 0;  // bytes/second

    ResourceSpec& operator+=(const ResourceSpec& o) {
        vcores += o.vcores;
        memory += o.memory;
        io_rate += o.io_rate;
        return *this;
    }
    friend ResourceSpec operator+(ResourceSpec a, const ResourceSpec& b) { return a += b; }
    bool fits_within(const ResourceSpec& cap) const {
        return vcores <= cap.vcores && memory <= cap.memory && io_rate <= cap.io_rate;
    }
    bool operator==(const ResourceSpec&) const = default;
};

enum class Dimension { vcores, memory, io_rate };

const char* to_string(Dimension d);

enum class RmError { no_such_class, no_such_host, duplicate_container, invalid_state };

const char* to_string(RmError e);

enum class AllocationState { requested, running, finished };

/*
 * ResourceManager
 *
 * Capacity bookkeeping and admission control. A host's io_rate capacity is
 * the sum of its disks' sustained throughputs; Requested and Running
 * allocations both count against capacity so admission stays safe while a
 * start is in flight. The registry exposes Running containers' rate classes
 * to the connection monitor.
 */
class ResourceManager {
public:
    void add_class(const std::string& class_name, ResourceSpec spec);
    void add_host(const std::string& host, ResourceSpec capacity);

    struct AdmitDecision {
        bool accepted = false;
        // First violated dimension, checked in vcores, memory, io_rate order.
        std::optional<Dimension> reject_reason;
    };

    Result<AdmitDecision, RmError> admit(const std::string& container_id,
                                         const std::string& class_name,
                                         const std::string& host);
    Result<void, RmError> start_container(const std::string& container_id);
    Result<void, RmError> finish_container(const std::string& container_id);

    struct RegistryEntry {
        std::string class_name;
        std::int64_t io_rate;
    };
    // Running containers only; Requested and Finished lookups return nullopt.
    std::optional<RegistryEntry> registry_lookup(const std::string& container_id) const;

    std::optional<AllocationState> allocation_state(const std::string& container_id) const;
    ResourceSpec host_capacity(const std::string& host) const;
    ResourceSpec host_usage(const std::string& host) const;
    bool never_oversubscribed() const;

private:
    struct Allocation {
        std::string host;
        std::string class_name;
        AllocationState state;
    };

    std::map<std::string, ResourceSpec> classes_;
    std::map<std::string, ResourceSpec> hosts_;
    std::map<std::string, Allocation> allocations_;
};

}  // namespace piperate
