#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <vector>

#include "tcpsim/cbr.hpp"
#include "tcpsim/engine.hpp"
#include "tcpsim/network.hpp"
#include "tcpsim/packet.hpp"
#include "tcpsim/rng.hpp"
#include "tcpsim/topology.hpp"
#include "tcpsim/trace.hpp"

using namespace tcpsim;

namespace {

struct CbrHarness {
    Engine engine;
    TraceSink sink;
    SplitMix64 rng{1};
    UidSource uids;
    Network net;
    std::vector<Packet> arrived;

    CbrHarness() : net(engine, make_line(), sink, rng) {
        net.register_agent(AgentAddr{1, 0}, [this](const Packet& p) { arrived.push_back(p); });
    }

    static Topology make_line() {
        QueueConfig q;
        q.limit = 1000;
        Topology t(2);
        t.add_duplex(0, 1, 100e6, SimTime::from_seconds(0.0001), q);
        t.compute_routes();
        return t;
    }

    CbrSource source(double rate_bps, double start_s, double stop_s) {
        return CbrSource(engine, net, uids, 3, AgentAddr{0, 0}, AgentAddr{1, 0}, rate_bps, 1000,
                         SimTime::from_seconds(start_s), SimTime::from_seconds(stop_s));
    }
};

}  // namespace

TEST_CASE("the departure interval is packet bits over the rate") {
    CbrHarness h;
    CHECK(h.source(1e6, 0, 1).interval() == SimTime::from_seconds(0.008));
    CHECK(h.source(10e6, 0, 1).interval() == SimTime::from_seconds(0.0008));
    CHECK(h.source(12e6, 0, 1).interval() == SimTime::from_seconds(1000 * 8.0 / 12e6));
}

TEST_CASE("departures tick at a fixed interval over the half open active window") {
    CbrHarness h;
    CbrSource src = h.source(1e6, 0, 0.0161);  // departures at 0, 8 and 16 ms
    src.arm();
    h.engine.run_until(SimTime::from_seconds(0.1));
    CHECK(src.sent() == 3);
    REQUIRE(h.arrived.size() == 3);
    CHECK(h.arrived[0].seq == 0);
    CHECK(h.arrived[1].seq == 1);
    CHECK(h.arrived[2].seq == 2);
    CHECK(h.arrived[0].kind == PacketKind::Cbr);
    CHECK(h.arrived[0].flow_id == 3);
    CHECK(h.arrived[0].size_bytes == 1000);
    CHECK(h.arrived[1].created_at - h.arrived[0].created_at == SimTime::from_seconds(0.008));
    CHECK(h.arrived[2].created_at - h.arrived[1].created_at == SimTime::from_seconds(0.008));
}

TEST_CASE("a departure that lands on the stop time is suppressed") {
    CbrHarness h;
    CbrSource src = h.source(1e6, 0, 0.016);  // the 16 ms tick hits the boundary
    src.arm();
    h.engine.run_until(SimTime::from_seconds(0.1));
    CHECK(src.sent() == 2);
}

TEST_CASE("arming with jitter delays only the first departure") {
    CbrHarness h;
    CbrSource src = h.source(1e6, 0, 1.0);
    src.arm(SimTime::from_seconds(0.003));

    h.engine.run_until(SimTime::from_seconds(0.0029));
    CHECK(src.sent() == 0);
    h.engine.run_until(SimTime::from_seconds(0.0031));
    CHECK(src.sent() == 1);
    h.engine.run_until(SimTime::from_seconds(0.0109));
    CHECK(src.sent() == 1);
    h.engine.run_until(SimTime::from_seconds(0.0111));
    CHECK(src.sent() == 2);  // the cadence stays one packet per interval
}

TEST_CASE("source construction and arming reject bad parameters") {
    CbrHarness h;
    CHECK_THROWS_AS(h.source(0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(h.source(-1e6, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(h.source(1e6, 1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(CbrSource(h.engine, h.net, h.uids, 3, AgentAddr{0, 0}, AgentAddr{1, 0}, 1e6,
                              0, SimTime(), SimTime::from_seconds(1)),
                    std::invalid_argument);

    CbrSource src = h.source(1e6, 0, 1);
    CHECK_THROWS_AS(src.arm(SimTime::from_seconds(-0.001)), std::invalid_argument);
}

TEST_CASE("a packet sink counts arrivals and bytes") {
    Engine engine;
    TraceSink sink;
    SplitMix64 rng(1);
    Network net(engine, CbrHarness::make_line(), sink, rng);
    PacketSink counter(net, AgentAddr{1, 0});

    Packet p;
    p.flow_id = 3;
    p.kind = PacketKind::Cbr;
    p.size_bytes = 1000;
    p.src = AgentAddr{0, 0};
    p.dst = AgentAddr{1, 0};
    net.inject(p, 0);
    net.inject(p, 0);
    engine.run_until(SimTime::from_seconds(0.1));
    CHECK(counter.received() == 2);
    CHECK(counter.bytes() == 2000);
    CHECK(counter.addr() == AgentAddr{1, 0});
}
