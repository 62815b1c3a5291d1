#ifndef TCPSIM_TOPOLOGY_HPP
#define TCPSIM_TOPOLOGY_HPP

#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcpsim/queue.hpp"
#include "tcpsim/time.hpp"

namespace tcpsim {

struct LinkSpec {
    int from = 0;
    int to = 0;
    double bandwidth_bps = 0;
    SimTime prop_delay;
    QueueConfig queue;
};

inline SimTime serialization_time(double bandwidth_bps, int size_bytes) {
    return SimTime::from_seconds(size_bytes * 8.0 / bandwidth_bps);
}

struct LinkTiming {
    SimTime start;
    SimTime serialization_end;
    SimTime delivery;
};

// Store-and-forward transmission of one packet over a non-preemptive link.
// Advances busy_until; the caller owns it as part of link state.
inline LinkTiming link_transmit(SimTime& busy_until, double bandwidth_bps, SimTime prop_delay,
                                int size_bytes, SimTime now) {
    LinkTiming t;
    t.start = busy_until > now ? busy_until : now;
    t.serialization_end = t.start + serialization_time(bandwidth_bps, size_bytes);
    t.delivery = t.serialization_end + prop_delay;
    busy_until = t.serialization_end;
    return t;
}

// Static directed graph with per-destination next-hop routes (shortest hop
// count, computed once at build).
class Topology {
public:
    explicit Topology(int node_count) : node_count_(node_count), egress_(node_count) {
        if (node_count <= 0)
            throw std::invalid_argument("topology needs at least one node");
    }

    void add_duplex(int a, int b, double bandwidth_bps, SimTime prop_delay,
                    const QueueConfig& queue) {
        add_directed(a, b, bandwidth_bps, prop_delay, queue);
        add_directed(b, a, bandwidth_bps, prop_delay, queue);
    }

    void add_directed(int from, int to, double bandwidth_bps, SimTime prop_delay,
                      const QueueConfig& queue) {
        check_node(from);
        check_node(to);
        if (bandwidth_bps <= 0)
            throw std::invalid_argument("link bandwidth must be positive");
        if (prop_delay < SimTime())
            throw std::invalid_argument("propagation delay must be nonnegative");
        queue.validate();
        egress_[static_cast<std::size_t>(from)].push_back(static_cast<int>(links_.size()));
        links_.push_back(LinkSpec{from, to, bandwidth_bps, prop_delay, queue});
        routes_.clear();
    }

    void compute_routes() {
        routes_.assign(static_cast<std::size_t>(node_count_),
                       std::vector<int>(static_cast<std::size_t>(node_count_), -1));
        // BFS per destination over reversed links; ties resolved by link
        // insertion order so route tables are deterministic.
        std::vector<std::vector<int>> ingress(static_cast<std::size_t>(node_count_));
        for (std::size_t i = 0; i < links_.size(); ++i)
            ingress[static_cast<std::size_t>(links_[i].to)].push_back(static_cast<int>(i));
        for (int dst = 0; dst < node_count_; ++dst) {
            std::vector<bool> seen(static_cast<std::size_t>(node_count_), false);
            seen[static_cast<std::size_t>(dst)] = true;
            std::deque<int> frontier{dst};
            while (!frontier.empty()) {
                int node = frontier.front();
                frontier.pop_front();
                for (int li : ingress[static_cast<std::size_t>(node)]) {
                    int prev = links_[static_cast<std::size_t>(li)].from;
                    if (seen[static_cast<std::size_t>(prev)])
                        continue;
                    seen[static_cast<std::size_t>(prev)] = true;
                    routes_[static_cast<std::size_t>(prev)][static_cast<std::size_t>(dst)] = li;
                    frontier.push_back(prev);
                }
            }
        }
    }

    int node_count() const { return node_count_; }
    const std::vector<LinkSpec>& links() const { return links_; }
    const LinkSpec& link(int idx) const { return links_.at(static_cast<std::size_t>(idx)); }

    // Egress link index for the next hop from `at` toward `dst`; -1 if
    // unreachable.
    int next_hop_link(int at, int dst) const {
        check_node(at);
        check_node(dst);
        if (routes_.empty())
            throw std::logic_error("compute_routes not called");
        return routes_[static_cast<std::size_t>(at)][static_cast<std::size_t>(dst)];
    }

    // Node sequence src..dst; throws if no route exists.
    std::vector<int> route(int src, int dst) const {
        std::vector<int> nodes{src};
        int at = src;
        while (at != dst) {
            int li = next_hop_link(at, dst);
            if (li < 0)
                throw std::invalid_argument("no route from node " + std::to_string(src) +
                                            " to node " + std::to_string(dst));
            at = links_[static_cast<std::size_t>(li)].to;
            nodes.push_back(at);
        }
        return nodes;
    }

private:
    void check_node(int n) const {
        if (n < 0 || n >= node_count_)
            throw std::invalid_argument("node index out of range: " + std::to_string(n));
    }

    int node_count_;
    std::vector<LinkSpec> links_;
    std::vector<std::vector<int>> egress_;
    std::vector<std::vector<int>> routes_;
};

// Six-node dumbbell: N1 and N5 feed N2, N4 and N6 hang off N3, N2-N3 is the
// shared bottleneck. Node indices 0..5 stand for N1..N6.
inline Topology build_dumbbell(double bandwidth_bps, SimTime prop_delay,
                               const QueueConfig& bottleneck_queue,
                               const QueueConfig& edge_queue) {
    Topology t(6);
    t.add_duplex(0, 1, bandwidth_bps, prop_delay, edge_queue);   // N1-N2
    t.add_duplex(4, 1, bandwidth_bps, prop_delay, edge_queue);   // N5-N2
    t.add_duplex(1, 2, bandwidth_bps, prop_delay, bottleneck_queue);  // N2-N3
    t.add_duplex(2, 3, bandwidth_bps, prop_delay, edge_queue);   // N3-N4
    t.add_duplex(2, 5, bandwidth_bps, prop_delay, edge_queue);   // N3-N6
    t.compute_routes();
    return t;
}

}  // namespace tcpsim

#endif
