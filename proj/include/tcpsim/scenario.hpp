#ifndef TCPSIM_SCENARIO_HPP
#define TCPSIM_SCENARIO_HPP

#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcpsim/cbr.hpp"
#include "tcpsim/engine.hpp"
#include "tcpsim/metrics.hpp"
#include "tcpsim/network.hpp"
#include "tcpsim/packet.hpp"
#include "tcpsim/queue.hpp"
#include "tcpsim/rng.hpp"
#include "tcpsim/tcp.hpp"
#include "tcpsim/topology.hpp"
#include "tcpsim/trace.hpp"

namespace tcpsim {

// Flow ids are fixed across all experiments.
inline constexpr int kFlowTcpA = 1;
inline constexpr int kFlowTcpB = 2;
inline constexpr int kFlowCbr = 3;

// Simulation-wide defaults, pinned here and written into every run's
// metadata so each output is reproducible from its own header.
struct SimConfig {
    double link_bandwidth_bps = 10e6;
    double prop_delay_s = 0.010;
    int bottleneck_queue_limit = 100;
    int edge_queue_limit = 100;
    RedParams red;
    TcpConfig tcp;
    int cbr_packet_size = 1000;
    double duration_s = 30;
    double warmup_s = 0;
    double bucket_s = 0.5;
    double exp3_cbr_start_s = 5;
    double default_cbr_mbps_exp12 = 8;
    double default_cbr_mbps_exp3 = 9.5;
    // Single-flow and pairwise runs cap the receiver window well below the
    // ~78-segment bandwidth-delay product. Two capped flows plus an 8 Mbps
    // CBR then stay under the 10 Mbps bottleneck, which is what produces the
    // flat throughput-vs-CBR curve those experiments look for. The queue
    // comparison runs keep the full protocol default so TCP can saturate the
    // link before the CBR source starts.
    int exp12_rcv_wnd = 7;
    // First CBR departure is delayed by uniform() * interval * this fraction.
    // Without it, source, link, and retransmit clocks share a small common
    // period and can stay phase-locked for a whole overloaded run.
    double cbr_jitter_frac = 1.0;
};

struct Scenario {
    int experiment = 1;
    TcpVariant variant_a = TcpVariant::Reno;
    std::optional<TcpVariant> variant_b;
    std::optional<double> cbr_mbps;
    QueueKind queue_kind = QueueKind::DropTail;
    std::uint64_t seed = 4;
    std::optional<double> duration_s;
    std::optional<double> cbr_start_s;
    std::vector<double> tcp_start_s;  // per TCP flow; missing entries default to 0

    void validate() const {
        if (experiment < 1 || experiment > 3)
            throw std::invalid_argument("experiment must be 1, 2, or 3");
        if (experiment == 2 && !variant_b)
            throw std::invalid_argument("experiment 2 needs a variant pair");
        if (experiment != 2 && variant_b)
            throw std::invalid_argument("variant pair only applies to experiment 2");
        if (cbr_mbps && *cbr_mbps < 0)
            throw std::invalid_argument("cbr rate must be nonnegative");
        if (duration_s && *duration_s <= 0)
            throw std::invalid_argument("duration must be positive");
        if (tcp_start_s.size() > (experiment == 2 ? 2u : 1u))
            throw std::invalid_argument("too many tcp start times");
        for (double t : tcp_start_s)
            if (t < 0)
                throw std::invalid_argument("tcp start time must be nonnegative");
    }
};

// A scenario with every default filled in; the unit of reproducibility.
struct ResolvedScenario {
    int experiment = 1;
    TcpVariant variant_a = TcpVariant::Reno;
    std::optional<TcpVariant> variant_b;
    double cbr_mbps = 0;
    QueueKind queue_kind = QueueKind::DropTail;
    std::uint64_t seed = 4;
    double duration_s = 30;
    double cbr_start_s = 0;
    double tcp_start_a_s = 0;
    double tcp_start_b_s = 0;

    std::string id() const {
        std::string s = "exp" + std::to_string(experiment);
        s += "-";
        s += to_token(variant_a);
        if (variant_b) {
            s += "-";
            s += to_token(*variant_b);
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", cbr_mbps);
        s += "-cbr";
        s += buf;
        s += "-";
        s += to_token(queue_kind);
        s += "-s" + std::to_string(seed);
        return s;
    }
};

inline ResolvedScenario resolve(const Scenario& sc, const SimConfig& cfg) {
    sc.validate();
    ResolvedScenario r;
    r.experiment = sc.experiment;
    r.variant_a = sc.variant_a;
    r.variant_b = sc.variant_b;
    r.cbr_mbps = sc.cbr_mbps.value_or(sc.experiment == 3 ? cfg.default_cbr_mbps_exp3
                                                         : cfg.default_cbr_mbps_exp12);
    r.queue_kind = sc.queue_kind;
    r.seed = sc.seed;
    r.duration_s = sc.duration_s.value_or(cfg.duration_s);
    r.cbr_start_s = sc.cbr_start_s.value_or(sc.experiment == 3 ? cfg.exp3_cbr_start_s : 0.0);
    r.tcp_start_a_s = sc.tcp_start_s.size() > 0 ? sc.tcp_start_s[0] : 0.0;
    r.tcp_start_b_s = sc.tcp_start_s.size() > 1 ? sc.tcp_start_s[1] : 0.0;
    if (r.cbr_start_s >= r.duration_s && r.cbr_mbps > 0)
        throw std::invalid_argument("cbr start beyond run duration");
    return r;
}

struct RunResult {
    ResolvedScenario params;
    SimStats engine_stats;
    std::vector<TraceRecord> records;

    std::map<int, Network::FlowCounters> flow_net;
    std::map<int, TcpSenderStats> tcp_stats;
    std::map<int, std::int64_t> tcp_delivered_segments;  // receiver rcv_nxt per flow
    std::map<int, bool> tcp_stream_intact;  // delivery log was 0,1,2,... with no holes
    std::int64_t cbr_sent = 0;
    std::int64_t cbr_received = 0;
    bool queue_bound_ok = true;
    int bottleneck_max_occupancy = 0;
};

// One wired, runnable experiment instance. Build, optionally attach a trace
// stream or a scripted drop filter, then run() exactly once.
class Simulation {
public:
    Simulation(const Scenario& sc, const SimConfig& cfg)
        : cfg_(cfg), params_(resolve(sc, cfg)), rng_(params_.seed) {
        QueueConfig bottleneck;
        bottleneck.kind = params_.queue_kind;
        bottleneck.limit = cfg.bottleneck_queue_limit;
        bottleneck.red = cfg.red;
        bottleneck.red.mean_pkt_bytes = cfg.tcp.segment_size;
        QueueConfig edge;
        edge.kind = QueueKind::DropTail;
        edge.limit = cfg.edge_queue_limit;
        net_ = std::make_unique<Network>(
            engine_,
            build_dumbbell(cfg.link_bandwidth_bps, SimTime::from_seconds(cfg.prop_delay_s),
                           bottleneck, edge),
            sink_, rng_);
        wire_agents();
    }

    void attach_trace_stream(std::ostream& out) { sink_.attach_stream(out); }
    void set_drop_filter(Network::DropFilter f) { net_->set_drop_filter(std::move(f)); }

    RunResult run() {
        if (ran_)
            throw std::logic_error("simulation already ran");
        ran_ = true;
        for (auto& s : senders_)
            s->start(SimTime::from_seconds(s->flow_id() == kFlowTcpA ? params_.tcp_start_a_s
                                                                     : params_.tcp_start_b_s));
        if (cbr_) {
            // Drawn before any queue decision so the draw order is fixed.
            double frac = cfg_.cbr_jitter_frac > 0 ? rng_.uniform01() * cfg_.cbr_jitter_frac : 0;
            cbr_->arm(SimTime::from_seconds(frac * cbr_->interval().seconds()));
        }

        RunResult res;
        res.params = params_;
        res.engine_stats = engine_.run_until(SimTime::from_seconds(params_.duration_s));
        res.records = sink_.take_records();
        for (int fid : {kFlowTcpA, kFlowTcpB, kFlowCbr})
            res.flow_net[fid] = net_->flow_counters(fid);
        for (std::size_t i = 0; i < senders_.size(); ++i) {
            int fid = senders_[i]->flow_id();
            res.tcp_stats[fid] = senders_[i]->stats();
            const auto& log = receivers_[i]->delivery_log();
            bool intact = true;
            for (std::size_t k = 0; k < log.size(); ++k)
                if (log[k] != static_cast<std::int64_t>(k)) {
                    intact = false;
                    break;
                }
            res.tcp_stream_intact[fid] = intact;
            res.tcp_delivered_segments[fid] = receivers_[i]->rcv_nxt();
        }
        if (cbr_)
            res.cbr_sent = cbr_->sent();
        if (cbr_sink_)
            res.cbr_received = cbr_sink_->received();
        for (std::size_t li = 0; li < net_->topology().links().size(); ++li) {
            int occ = net_->max_observed_occupancy(static_cast<int>(li));
            if (occ > net_->topology().link(static_cast<int>(li)).queue.limit)
                res.queue_bound_ok = false;
        }
        res.bottleneck_max_occupancy = net_->max_observed_occupancy(bottleneck_link_);
        return res;
    }

    const ResolvedScenario& params() const { return params_; }
    Engine& engine() { return engine_; }
    Network& network() { return *net_; }
    TcpSender& sender(int flow_id) {
        for (auto& s : senders_)
            if (s->flow_id() == flow_id)
                return *s;
        throw std::invalid_argument("no sender for flow " + std::to_string(flow_id));
    }
    TcpReceiver& receiver(int flow_id) {
        for (std::size_t i = 0; i < senders_.size(); ++i)
            if (senders_[i]->flow_id() == flow_id)
                return *receivers_[i];
        throw std::invalid_argument("no receiver for flow " + std::to_string(flow_id));
    }
    int bottleneck_link() const { return bottleneck_link_; }

private:
    void add_tcp_flow(int flow_id, TcpVariant variant, int src_node, int dst_node) {
        TcpConfig tc = cfg_.tcp;
        tc.variant = variant;
        if (params_.experiment != 3)
            tc.rcv_wnd = cfg_.exp12_rcv_wnd;
        AgentAddr src{src_node, 0};
        AgentAddr dst{dst_node, 0};
        senders_.push_back(
            std::make_unique<TcpSender>(engine_, *net_, uids_, tc, flow_id, src, dst));
        receivers_.push_back(std::make_unique<TcpReceiver>(engine_, *net_, uids_, flow_id, dst,
                                                           src, tc.ack_size,
                                                           variant == TcpVariant::Sack));
    }

    void add_cbr_flow(int src_node, int dst_node) {
        if (params_.cbr_mbps <= 0)
            return;
        AgentAddr src{src_node, 0};
        AgentAddr dst{dst_node, 0};
        cbr_ = std::make_unique<CbrSource>(engine_, *net_, uids_, kFlowCbr, src, dst,
                                           params_.cbr_mbps * 1e6, cfg_.cbr_packet_size,
                                           SimTime::from_seconds(params_.cbr_start_s),
                                           SimTime::from_seconds(params_.duration_s));
        cbr_sink_ = std::make_unique<PacketSink>(*net_, dst);
    }

    void wire_agents() {
        bottleneck_link_ = net_->topology().next_hop_link(1, 2);
        switch (params_.experiment) {
        case 1:
            add_tcp_flow(kFlowTcpA, params_.variant_a, 0, 3);  // N1 -> N4
            add_cbr_flow(1, 2);                                // N2 -> N3
            break;
        case 2:
            add_tcp_flow(kFlowTcpA, params_.variant_a, 0, 3);  // N1 -> N4
            add_tcp_flow(kFlowTcpB, *params_.variant_b, 4, 5);  // N5 -> N6
            add_cbr_flow(1, 2);
            break;
        case 3:
            add_tcp_flow(kFlowTcpA, params_.variant_a, 0, 3);
            add_cbr_flow(4, 5);  // N5 -> N6
            break;
        default:
            throw std::invalid_argument("bad experiment");
        }
    }

    SimConfig cfg_;
    ResolvedScenario params_;
    Engine engine_;
    TraceSink sink_;
    SplitMix64 rng_;
    UidSource uids_;
    std::unique_ptr<Network> net_;
    std::vector<std::unique_ptr<TcpSender>> senders_;
    std::vector<std::unique_ptr<TcpReceiver>> receivers_;
    std::unique_ptr<CbrSource> cbr_;
    std::unique_ptr<PacketSink> cbr_sink_;
    int bottleneck_link_ = -1;
    bool ran_ = false;
};

}  // namespace tcpsim

#endif
