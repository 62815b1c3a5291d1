#ifndef TCPSIM_NETWORK_HPP
#define TCPSIM_NETWORK_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tcpsim/engine.hpp"
#include "tcpsim/packet.hpp"
#include "tcpsim/queue.hpp"
#include "tcpsim/rng.hpp"
#include "tcpsim/topology.hpp"
#include "tcpsim/trace.hpp"

namespace tcpsim {

enum class ForwardOutcome { Delivered, Enqueued, Dropped };

// Runtime packet plane: moves packets hop by hop over the topology, applies
// the egress queue discipline, and writes the trace. Agents hang off node
// (node, port) addresses and get packets handed back via their handler.
class Network {
public:
    using AgentHandler = std::function<void(const Packet&)>;
    // Return true to drop the packet before it reaches the egress queue.
    // Used to script deterministic losses.
    using DropFilter = std::function<bool(const Packet&, int link_idx)>;

    struct LinkCounters {
        std::int64_t offered = 0;
        std::int64_t delivered = 0;
        std::int64_t dropped = 0;
        std::int64_t in_flight = 0;
    };

    struct FlowCounters {
        std::int64_t injected = 0;
        std::int64_t delivered = 0;
        std::int64_t delivered_bytes = 0;
        std::int64_t dropped = 0;
    };

    Network(Engine& engine, Topology topology, TraceSink& sink, SplitMix64& rng)
        : engine_(engine), topo_(std::move(topology)), sink_(sink), rng_(rng) {
        for (const auto& spec : topo_.links())
            links_.emplace_back(spec);
        counters_.resize(links_.size());
    }

    void register_agent(AgentAddr addr, AgentHandler handler) {
        auto key = std::make_pair(addr.node, addr.port);
        if (agents_.count(key))
            throw std::invalid_argument("agent address already in use: " + addr.to_string());
        agents_[key] = std::move(handler);
    }

    void set_drop_filter(DropFilter f) { drop_filter_ = std::move(f); }

    // Entry point for agents: the packet starts at its source node.
    void inject(const Packet& pkt, int at_node) {
        ++flows_[pkt.flow_id].injected;
        forward(pkt, at_node);
    }

    ForwardOutcome forward(const Packet& pkt, int at_node) {
        if (at_node == pkt.dst.node) {
            deliver(pkt);
            return ForwardOutcome::Delivered;
        }
        int li = topo_.next_hop_link(at_node, pkt.dst.node);
        if (li < 0)
            throw SimInvariantError("no route for packet at node " + std::to_string(at_node));
        return offer_to_link(li, pkt);
    }

    const Topology& topology() const { return topo_; }
    const LinkCounters& link_counters(int li) const {
        return counters_.at(static_cast<std::size_t>(li));
    }
    const LinkQueue& queue(int li) const { return links_.at(static_cast<std::size_t>(li)).queue; }
    const FlowCounters& flow_counters(int flow_id) const {
        static const FlowCounters zero{};
        auto it = flows_.find(flow_id);
        return it == flows_.end() ? zero : it->second;
    }
    int max_observed_occupancy(int li) const {
        return links_.at(static_cast<std::size_t>(li)).max_occupancy;
    }

private:
    struct LinkState {
        explicit LinkState(const LinkSpec& s)
            : spec(s), queue(s.queue, serialization_time(s.bandwidth_bps, s.queue.red.mean_pkt_bytes)) {}
        LinkSpec spec;
        LinkQueue queue;
        SimTime busy_until;
        bool transmitting = false;
        int max_occupancy = 0;
    };

    ForwardOutcome offer_to_link(int li, const Packet& pkt) {
        LinkState& link = links_[static_cast<std::size_t>(li)];
        LinkCounters& c = counters_[static_cast<std::size_t>(li)];
        ++c.offered;
        trace(TraceEvent::Enqueue, link.spec, pkt);
        if (drop_filter_ && drop_filter_(pkt, li)) {
            drop(li, pkt);
            return ForwardOutcome::Dropped;
        }
        AdmitDecision d = link.queue.offer(pkt, engine_.now(), rng_);
        if (d != AdmitDecision::Admit) {
            drop(li, pkt);
            return ForwardOutcome::Dropped;
        }
        if (link.queue.occupancy() > link.max_occupancy)
            link.max_occupancy = link.queue.occupancy();
        if (!link.transmitting)
            start_transmission(li);
        return ForwardOutcome::Enqueued;
    }

    void start_transmission(int li) {
        LinkState& link = links_[static_cast<std::size_t>(li)];
        auto pkt = link.queue.pop(engine_.now());
        if (!pkt)
            throw SimInvariantError("transmission started on empty queue");
        trace(TraceEvent::Dequeue, link.spec, *pkt);
        LinkTiming t = link_transmit(link.busy_until, link.spec.bandwidth_bps,
                                     link.spec.prop_delay, pkt->size_bytes, engine_.now());
        if (t.start != engine_.now())
            throw SimInvariantError("link busy at transmission start");
        link.transmitting = true;
        ++counters_[static_cast<std::size_t>(li)].in_flight;
        engine_.schedule(t.serialization_end - engine_.now(), [this, li] { on_link_free(li); });
        Packet moving = std::move(*pkt);
        engine_.schedule(t.delivery - engine_.now(),
                         [this, li, moving] { on_arrival(li, moving); });
    }

    void on_link_free(int li) {
        LinkState& link = links_[static_cast<std::size_t>(li)];
        link.transmitting = false;
        if (link.queue.occupancy() > 0)
            start_transmission(li);
    }

    void on_arrival(int li, const Packet& pkt) {
        LinkState& link = links_[static_cast<std::size_t>(li)];
        LinkCounters& c = counters_[static_cast<std::size_t>(li)];
        --c.in_flight;
        ++c.delivered;
        trace(TraceEvent::Receive, link.spec, pkt);
        forward(pkt, link.spec.to);
    }

    void deliver(const Packet& pkt) {
        auto it = agents_.find(std::make_pair(pkt.dst.node, pkt.dst.port));
        if (it == agents_.end())
            throw SimInvariantError("packet for unregistered agent " + pkt.dst.to_string());
        FlowCounters& f = flows_[pkt.flow_id];
        ++f.delivered;
        f.delivered_bytes += pkt.size_bytes;
        it->second(pkt);
    }

    void drop(int li, const Packet& pkt) {
        LinkState& link = links_[static_cast<std::size_t>(li)];
        ++counters_[static_cast<std::size_t>(li)].dropped;
        ++flows_[pkt.flow_id].dropped;
        trace(TraceEvent::Drop, link.spec, pkt);
    }

    void trace(TraceEvent ev, const LinkSpec& spec, const Packet& pkt) {
        TraceRecord r;
        r.event = ev;
        r.time = engine_.now();
        r.from_node = spec.from;
        r.to_node = spec.to;
        r.pkt_type = pkt.kind;
        r.pkt_size = pkt.size_bytes;
        r.fid = pkt.flow_id;
        r.src = pkt.src;
        r.dst = pkt.dst;
        r.seq_num = pkt.seq;
        r.pkt_id = pkt.pkt_id;
        sink_.emit(r);
    }

    Engine& engine_;
    Topology topo_;
    TraceSink& sink_;
    SplitMix64& rng_;
    std::vector<LinkState> links_;
    std::vector<LinkCounters> counters_;
    std::map<std::pair<int, int>, AgentHandler> agents_;
    std::map<int, FlowCounters> flows_;
    DropFilter drop_filter_;
};

}  // namespace tcpsim

#endif
