#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "piperate/sim_time.hpp"

namespace piperate {

/*
 * Deterministic single-threaded discrete-event engine. Events scheduled for
 * the same timestamp run in scheduling order (FIFO by sequence number), so a
 * run is fully determined by the schedule calls, never by container layout.
 */
class EventEngine {
public:
    SimTime now() const { return now_; }

    void schedule_at(SimTime at, std::function<void()> fn) {
        if (at < now_) at = now_;
        heap_.push_back(Item{at, next_seq_++, std::move(fn)});
        std::push_heap(heap_.begin(), heap_.end(), Later{});
    }

    void schedule_after(SimTime delay, std::function<void()> fn) {
        schedule_at(now_ + delay, std::move(fn));
    }

    // Runs every event with timestamp <= horizon, then advances the clock to
    // the horizon even if the queue drained earlier.
    void run_until(SimTime horizon) {
        while (!heap_.empty() && heap_.front().at <= horizon) {
            std::pop_heap(heap_.begin(), heap_.end(), Later{});
            Item item = std::move(heap_.back());
            heap_.pop_back();
            now_ = item.at;
            item.fn();
        }
        if (horizon > now_) now_ = horizon;
    }

    bool empty() const { return heap_.empty(); }
    std::size_t pending() const { return heap_.size(); }

private:
    struct Item {
        SimTime at;
        std::uint64_t seq;
        std::function<void()> fn;
    };
    // std::push_heap builds a max-heap; invert to pop the earliest item.
    struct Later {
        bool operator()(const Item& a, const Item& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    std::vector<Item> heap_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
};

}  // namespace piperate
