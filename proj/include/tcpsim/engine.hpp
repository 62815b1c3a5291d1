#ifndef TCPSIM_ENGINE_HPP
#define TCPSIM_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tcpsim/time.hpp"

namespace tcpsim {

// Thrown when internal consistency is broken (a bug, not bad input).
class SimInvariantError : public std::logic_error {
public:
    explicit SimInvariantError(const std::string& what) : std::logic_error(what) {}
};

struct SimStats {
    std::uint64_t events_processed = 0;
    // Time of the last event processed by the call (previous clock value if
    // the call processed nothing). Never exceeds the requested end time.
    SimTime final_time;
};

class EventHandle {
public:
    EventHandle() = default;
    bool valid() const { return id_ != 0; }

private:
    friend class Engine;
    explicit EventHandle(std::uint64_t id) : id_(id) {}
    std::uint64_t id_ = 0;
};

// Single-threaded event loop. Events with equal fire times run in the order
// they were scheduled, so a run is a pure function of its inputs and seed.
class Engine {
public:
    SimTime now() const { return now_; }

    EventHandle schedule(SimTime delay, std::function<void()> action) {
        if (delay < SimTime())
            throw std::invalid_argument("schedule: negative delay");
        if (!action)
            throw std::invalid_argument("schedule: empty action");
        std::uint64_t id = ++next_id_;
        pending_.insert(id);
        heap_.push(Entry{now_ + delay, id, std::move(action)});
        return EventHandle(id);
    }

    // True if the event was still pending. Cancelling twice, or cancelling
    // an event that already fired, returns false and has no effect.
    bool cancel(EventHandle h) { return pending_.erase(h.id_) > 0; }

    SimStats run_until(SimTime t_end) {
        if (t_end < now_)
            throw std::invalid_argument("run_until: end time in the past");
        if (running_)
            throw SimInvariantError("run_until called from within an event handler");
        running_ = true;
        SimStats stats;
        stats.final_time = now_;
        try {
            while (!heap_.empty() && heap_.top().at <= t_end) {
                Entry e = heap_.top();
                heap_.pop();
                if (pending_.erase(e.id) == 0)
                    continue;  // cancelled
                if (e.at < now_)
                    throw SimInvariantError("event queue yielded a past event");
                now_ = e.at;
                stats.final_time = now_;
                ++stats.events_processed;
                e.fn();
            }
        } catch (...) {
            running_ = false;
            throw;
        }
        now_ = t_end;
        running_ = false;
        return stats;
    }

    std::size_t pending_count() const { return pending_.size(); }

private:
    struct Entry {
        SimTime at;
        std::uint64_t id = 0;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.at.ns() != b.at.ns())
                return a.at.ns() > b.at.ns();
            return a.id > b.id;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::unordered_set<std::uint64_t> pending_;
    std::uint64_t next_id_ = 0;
    SimTime now_;
    bool running_ = false;
};

}  // namespace tcpsim

#endif
