#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "piperate/result.hpp"
#include "piperate/sim_time.hpp"

namespace piperate {

// 5-tuple-like identity of one container<->DataNode TCP subpipe. Rendering
// is the canonical ordering key everywhere a deterministic order is needed.
struct PipeKey {
    std::string src_host;
    int src_port = 0;
    std::string dst_host;
    int dst_port = 0;

    std::string render() const;
    bool operator==(const PipeKey&) const = default;
};

// Classifier pattern: each field is exact or wildcard.
struct PipePattern {
    std::optional<std::string> src_host;
    std::optional<int> src_port;
    std::optional<std::string> dst_host;
    std::optional<int> dst_port;

    static PipePattern exact(const PipeKey& key);

    bool matches(const PipeKey& key) const;
    int exact_fields() const;
    std::string render() const;  // wildcards render as '*'
    bool operator==(const PipePattern&) const = default;
};

enum class ShaperError { invalid_rate, no_such_class, no_such_filter, duplicate_filter };

const char* to_string(ShaperError e);

/*
 * TrafficShaper
 *
 * Stands in for the kernel traffic-control layer on one DataNode machine:
 * a filter table classifying pipes into shape classes, and one fluid token
 * bucket per class. Buckets hold at most `burst` bytes and refill at `rate`
 * bytes/second; a fresh class starts with a full bucket.
 */
class TrafficShaper {
public:
    struct FilterEntry {
        PipePattern pattern;
        std::string class_id;
        int priority = 0;
        bool operator==(const FilterEntry&) const = default;
    };

    struct ClassParams {
        double rate_bps = 0;
        double burst_bytes = 0;
        bool operator==(const ClassParams&) const = default;
    };

    Result<void, ShaperError> configure_class(const std::string& class_id, double rate_bps,
                                              double burst_bytes);
    Result<void, ShaperError> remove_class(const std::string& class_id);
    Result<void, ShaperError> add_filter(const PipePattern& pattern,
                                         const std::string& class_id, int priority);
    Result<void, ShaperError> remove_filter(const PipePattern& pattern,
                                            const std::string& class_id);

    // Lowest priority value wins; equal priorities prefer more exact fields,
    // then the lexicographically smaller pattern rendering. nullopt means
    // unclassified (not subject to any limit).
    std::optional<std::string> classify(const PipeKey& key) const;

    // Grants up to `requested` bytes against the class bucket at time `now`.
    Result<double, ShaperError> grant(const std::string& class_id, double requested,
                                      SimTime now);

    bool has_class(const std::string& class_id) const { return classes_.count(class_id) != 0; }
    std::optional<ClassParams> class_params(const std::string& class_id) const;
    double tokens(const std::string& class_id) const;
    const std::vector<FilterEntry>& filters() const { return filters_; }
    std::size_t class_count() const { return classes_.size(); }

private:
    struct ClassState {
        double rate_bps;
        double burst_bytes;
        double tokens;
        SimTime last_refill;
    };

    std::map<std::string, ClassState> classes_;
    std::vector<FilterEntry> filters_;
};

}  // namespace piperate
