// Whole-simulation checks: determinism, packet conservation, flow placement,
// and scripted-loss recovery behavior across the dumbbell.

#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "support.hpp"
#include "tcpsim/sim.hpp"

using namespace tcpsim;
using testsupport::flow_ledger;
using testsupport::render_records;
using testsupport::trace_well_ordered;

namespace {

Scenario exp1_scenario(TcpVariant v, double cbr_mbps) {
    Scenario sc;
    sc.experiment = 1;
    sc.variant_a = v;
    sc.cbr_mbps = cbr_mbps;
    return sc;
}

SimConfig short_config(double duration_s) {
    SimConfig cfg;
    cfg.duration_s = duration_s;
    return cfg;
}

}  // namespace

TEST_CASE("identical configurations replay the same trace byte for byte") {
    Scenario sc = exp1_scenario(TcpVariant::Reno, 8.0);
    SimConfig cfg = short_config(2.0);

    Simulation a(sc, cfg);
    Simulation b(sc, cfg);
    RunResult ra = a.run();
    RunResult rb = b.run();

    REQUIRE(!ra.records.empty());
    CHECK(ra.engine_stats.events_processed == rb.engine_stats.events_processed);
    CHECK(render_records(ra.records) == render_records(rb.records));
    CHECK(ra.tcp_stats.at(kFlowTcpA).segments_sent == rb.tcp_stats.at(kFlowTcpA).segments_sent);
    CHECK(ra.cbr_sent == rb.cbr_sent);
}

TEST_CASE("determinism holds with random early detection in the loop") {
    Scenario sc;
    sc.experiment = 3;
    sc.variant_a = TcpVariant::Sack;
    sc.queue_kind = QueueKind::Red;
    SimConfig cfg = short_config(2.0);
    cfg.exp3_cbr_start_s = 0.5;

    Simulation a(sc, cfg);
    Simulation b(sc, cfg);
    std::string ta = render_records(a.run().records);
    std::string tb = render_records(b.run().records);
    REQUIRE(!ta.empty());
    CHECK(ta == tb);
}

TEST_CASE("every data packet is enqueued, delivered, or dropped") {
    auto rate = GENERATE(8.0, 12.0);
    Scenario sc = exp1_scenario(TcpVariant::Reno, rate);
    SimConfig cfg = short_config(2.0);
    RunResult res = Simulation(sc, cfg).run();

    std::string why;
    INFO(why);
    CHECK(trace_well_ordered(res.records, &why));
    CHECK(res.queue_bound_ok);
    CHECK(res.tcp_stream_intact.at(kFlowTcpA));

    auto tcp = flow_ledger(res.records, kFlowTcpA, 0, 3);
    CHECK(tcp.sent == res.tcp_stats.at(kFlowTcpA).segments_sent);
    CHECK(tcp.in_flight() >= 0);
    CHECK(tcp.received >= res.tcp_delivered_segments.at(kFlowTcpA));
    // Network-level drops for the flow also count lost ACKs, the trace ledger
    // only data packets.
    CHECK(res.flow_net.at(kFlowTcpA).dropped >= tcp.dropped);

    auto cbr = flow_ledger(res.records, kFlowCbr, 1, 2);
    CHECK(cbr.sent == res.cbr_sent);
    CHECK(cbr.received == res.cbr_received);
    CHECK(cbr.dropped == res.flow_net.at(kFlowCbr).dropped);
    CHECK(cbr.in_flight() >= 0);
    // Bound: full bottleneck queue plus the bandwidth-delay product worth of
    // packets on the wire (10 Mbps * 10 ms / 1000 B = 12.5) and one in service.
    CHECK(cbr.in_flight() <= cfg.bottleneck_queue_limit + 16);
    if (rate > 10.0)
        CHECK(cbr.dropped > 0);
}

TEST_CASE("concurrent flows stay on their assigned edge nodes") {
    Scenario sc;
    sc.experiment = 2;
    sc.variant_a = TcpVariant::Reno;
    sc.variant_b = TcpVariant::Sack;
    sc.cbr_mbps = 4.0;
    SimConfig cfg = short_config(1.5);
    RunResult res = Simulation(sc, cfg).run();

    std::int64_t b_sends = 0, b_recvs = 0;
    for (const auto& r : res.records) {
        if (r.pkt_type == PacketKind::Ack)
            continue;
        if (r.fid == kFlowTcpA && r.event == TraceEvent::Enqueue && r.from_node == 0) {
            CHECK((r.src == AgentAddr{0, 0}));
            CHECK((r.dst == AgentAddr{3, 0}));
        }
        if (r.fid == kFlowTcpB) {
            if (r.event == TraceEvent::Enqueue && r.from_node == 4) {
                CHECK((r.src == AgentAddr{4, 0}));
                CHECK((r.dst == AgentAddr{5, 0}));
                ++b_sends;
            }
            if (r.event == TraceEvent::Receive && r.to_node == 5)
                ++b_recvs;
        }
        if (r.fid == kFlowCbr && r.event == TraceEvent::Enqueue && r.from_node == 1)
            CHECK((r.dst == AgentAddr{2, 0}));
    }
    CHECK(b_sends > 0);
    CHECK(b_recvs > 0);
    CHECK(res.tcp_stream_intact.at(kFlowTcpA));
    CHECK(res.tcp_stream_intact.at(kFlowTcpB));

    auto b = flow_ledger(res.records, kFlowTcpB, 4, 5);
    CHECK(b.sent == res.tcp_stats.at(kFlowTcpB).segments_sent);
    CHECK(b.in_flight() >= 0);
}

TEST_CASE("the background load in the shared queue study starts on schedule") {
    Scenario sc;
    sc.experiment = 3;
    sc.variant_a = TcpVariant::Reno;
    SimConfig cfg = short_config(2.0);
    cfg.exp3_cbr_start_s = 0.5;
    RunResult res = Simulation(sc, cfg).run();

    REQUIRE(res.cbr_sent > 0);
    bool saw_cbr = false;
    for (const auto& r : res.records)
        if (r.fid == kFlowCbr) {
            CHECK(r.time.seconds() >= 0.5);
            if (r.event == TraceEvent::Enqueue && r.from_node == 4) {
                CHECK((r.dst == AgentAddr{5, 0}));
                saw_cbr = true;
            }
        }
    CHECK(saw_cbr);

    auto cbr = flow_ledger(res.records, kFlowCbr, 4, 5);
    CHECK(cbr.sent == res.cbr_sent);
    CHECK(cbr.received == res.cbr_received);
}

TEST_CASE("a simulation runs exactly once") {
    Scenario sc = exp1_scenario(TcpVariant::Reno, 8.0);
    SimConfig cfg = short_config(0.5);
    Simulation sim(sc, cfg);
    CHECK_THROWS_AS(sim.sender(kFlowTcpB), std::invalid_argument);
    sim.run();
    CHECK_THROWS_AS(sim.run(), std::logic_error);
}

namespace {

// Two isolated data losses in the first window, no competing traffic. The
// window is opened wide so both holes sit inside one flight.
RunResult run_with_twin_losses(TcpVariant v) {
    Scenario sc = exp1_scenario(v, 0.0);
    SimConfig cfg = short_config(2.0);
    cfg.tcp.initial_cwnd = 20;
    cfg.exp12_rcv_wnd = 64;
    Simulation sim(sc, cfg);
    sim.set_drop_filter([](const Packet& p, int) {
        return p.kind == PacketKind::Tcp && p.flow_id == kFlowTcpA && p.uid == p.pkt_id &&
               (p.seq == 5 || p.seq == 7);
    });
    return sim.run();
}

}  // namespace

TEST_CASE("scripted twin losses separate the recovery strategies") {
    SECTION("plain fast recovery halves the window once per hole") {
        RunResult res = run_with_twin_losses(TcpVariant::Reno);
        const auto& st = res.tcp_stats.at(kFlowTcpA);
        CHECK(st.timeouts == 0);
        CHECK(st.ssthresh_reductions >= 2);
        CHECK(st.retransmits >= 2);
        CHECK(res.tcp_stream_intact.at(kFlowTcpA));
    }
    SECTION("partial acks keep the refined recovery inside one episode") {
        RunResult res = run_with_twin_losses(TcpVariant::NewReno);
        const auto& st = res.tcp_stats.at(kFlowTcpA);
        CHECK(st.timeouts == 0);
        CHECK(st.ssthresh_reductions == 1);
        CHECK(st.partial_acks >= 1);
        CHECK(res.tcp_stream_intact.at(kFlowTcpA));
    }
    SECTION("selective acknowledgments confine retransmissions to the holes") {
        RunResult res = run_with_twin_losses(TcpVariant::Sack);
        const auto& st = res.tcp_stats.at(kFlowTcpA);
        CHECK(st.timeouts == 0);
        CHECK(st.ssthresh_reductions == 1);
        CHECK(st.retransmits == 2);
        CHECK(st.fast_retransmits == 1);
        CHECK(res.tcp_stream_intact.at(kFlowTcpA));
    }
}
