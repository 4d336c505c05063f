#include "piperate/shaper.hpp"

#include <algorithm>
#include <cassert>

namespace piperate {

std::string PipeKey::render() const {
    return src_host + ":" + std::to_string(src_port) + "->" + dst_host + ":" +
           std::to_string(dst_port);
}

PipePattern PipePattern::exact(const PipeKey& key) {
    return PipePattern{key.src_host, key.src_port, key.dst_host, key.dst_port};
}

bool PipePattern::matches(const PipeKey& key) const {
    if (src_host && *src_host != key.src_host) return false;
    if (src_port && *src_port != key.src_port) return false;
    if (dst_host && *dst_host != key.dst_host) return false;
    if (dst_port && *dst_port != key.dst_port) return false;
    return true;
}

int PipePattern::exact_fields() const {
    return int(src_host.has_value()) + int(src_port.has_value()) +
           int(dst_host.has_value()) + int(dst_port.has_value());
}

std::string PipePattern::render() const {
    auto h = [](const std::optional<std::string>& v) { return v ? *v : std::string("*"); };
    auto p = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("*"); };
    return h(src_host) + ":" + p(src_port) + "->" + h(dst_host) + ":" + p(dst_port);
}

const char* to_string(ShaperError e) {
    switch (e) {
        case ShaperError::invalid_rate: return "invalid_rate";
        case ShaperError::no_such_class: return "no_such_class";
        case ShaperError::no_such_filter: return "no_such_filter";
        case ShaperError::duplicate_filter: return "duplicate_filter";
    }
    return "?";
}

Result<void, ShaperError> TrafficShaper::configure_class(const std::string& class_id,
                                                         double rate_bps,
                                                         double burst_bytes) {
    if (rate_bps <= 0 || burst_bytes <= 0) return ShaperError::invalid_rate;
    auto it = classes_.find(class_id);
    if (it == classes_.end()) {
        classes_[class_id] = ClassState{rate_bps, burst_bytes, burst_bytes, 0};
    } else {
        it->second.rate_bps = rate_bps;
        it->second.burst_bytes = burst_bytes;
        it->second.tokens = std::min(it->second.tokens, burst_bytes);
    }
    return {};
}

Result<void, ShaperError> TrafficShaper::remove_class(const std::string& class_id) {
    if (!classes_.erase(class_id)) return ShaperError::no_such_class;
    filters_.erase(std::remove_if(filters_.begin(), filters_.end(),
                                  [&](const FilterEntry& f) { return f.class_id == class_id; }),
                   filters_.end());
    return {};
}

Result<void, ShaperError> TrafficShaper::add_filter(const PipePattern& pattern,
                                                    const std::string& class_id,
                                                    int priority) {
    if (!classes_.count(class_id)) return ShaperError::no_such_class;
    for (const auto& f : filters_)
        if (f.pattern == pattern && f.class_id == class_id) return ShaperError::duplicate_filter;
    filters_.push_back(FilterEntry{pattern, class_id, priority});
    return {};
}

Result<void, ShaperError> TrafficShaper::remove_filter(const PipePattern& pattern,
                                                       const std::string& class_id) {
    auto it = std::find_if(filters_.begin(), filters_.end(), [&](const FilterEntry& f) {
        return f.pattern == pattern && f.class_id == class_id;
    });
    if (it == filters_.end()) return ShaperError::no_such_filter;
    filters_.erase(it);
    return {};
}

std::optional<std::string> TrafficShaper::classify(const PipeKey& key) const {
    const FilterEntry* best = nullptr;
    for (const auto& f : filters_) {
        if (!f.pattern.matches(key)) continue;
        if (!best) {
            best = &f;
            continue;
        }
        if (f.priority != best->priority) {
            if (f.priority < best->priority) best = &f;
            continue;
        }
        if (f.pattern.exact_fields() != best->pattern.exact_fields()) {
            if (f.pattern.exact_fields() > best->pattern.exact_fields()) best = &f;
            continue;
        }
        if (f.pattern.render() < best->pattern.render()) best = &f;
    }
    if (!best) return std::nullopt;
    return best->class_id;
}

Result<double, ShaperError> TrafficShaper::grant(const std::string& class_id,
                                                 double requested, SimTime now) {
    auto it = classes_.find(class_id);
    if (it == classes_.end()) return ShaperError::no_such_class;
    ClassState& c = it->second;
    assert(now >= c.last_refill);
    assert(requested >= 0);
    const double elapsed = to_seconds(now - c.last_refill);
    c.tokens = std::min(c.burst_bytes, c.tokens + c.rate_bps * elapsed);
    c.last_refill = now;
    const double granted = std::min(requested, c.tokens);
    c.tokens -= granted;
    return granted;
}

std::optional<TrafficShaper::ClassParams> TrafficShaper::class_params(
    const std::string& class_id) const {
    auto it = classes_.find(class_id);
    if (it == classes_.end()) return std::nullopt;
    return ClassParams{it->second.rate_bps, it->second.burst_bytes};
}

double TrafficShaper::tokens(const std::string& class_id) const {
    auto it = classes_.find(class_id);
    return it == classes_.end() ? 0.0 : it->second.tokens;
}

}  // namespace piperate
