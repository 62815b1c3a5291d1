#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <vector>

#include "tcpsim/time.hpp"
#include "tcpsim/topology.hpp"

using namespace tcpsim;

TEST_CASE("serialization time is size over bandwidth") {
    CHECK(serialization_time(10e6, 1000) == SimTime::from_seconds(0.0008));
    CHECK(serialization_time(10e6, 40) == SimTime::from_seconds(0.000032));
    CHECK(serialization_time(1.5e6, 1500) == SimTime::from_seconds(0.008));
}

TEST_CASE("link transmit computes store and forward timing") {
    SimTime busy;
    double bw = 10e6;
    SimTime prop = SimTime::from_seconds(0.010);

    SECTION("idle link starts immediately") {
        auto t = link_transmit(busy, bw, prop, 1000, SimTime::from_seconds(1.0));
        CHECK(t.start == SimTime::from_seconds(1.0));
        CHECK(t.serialization_end == SimTime::from_seconds(1.0008));
        CHECK(t.delivery == SimTime::from_seconds(1.0108));
        CHECK(busy == SimTime::from_seconds(1.0008));
    }

    SECTION("a 40 byte ack takes 32 microseconds plus propagation") {
        auto t = link_transmit(busy, bw, prop, 40, SimTime::from_seconds(1.0));
        CHECK(t.delivery == SimTime::from_seconds(1.010032));
    }

    SECTION("back to back packets serialize one after the other") {
        link_transmit(busy, bw, prop, 1000, SimTime::from_seconds(1.0));
        auto t2 = link_transmit(busy, bw, prop, 1000, SimTime::from_seconds(1.0));
        CHECK(t2.start == SimTime::from_seconds(1.0008));
        CHECK(t2.serialization_end == SimTime::from_seconds(1.0016));
        CHECK(t2.delivery == SimTime::from_seconds(1.0116));
        auto t3 = link_transmit(busy, bw, prop, 1000, SimTime::from_seconds(2.0));
        CHECK(t3.start == SimTime::from_seconds(2.0));
    }
}

TEST_CASE("dumbbell routes cross the shared middle hop") {
    QueueConfig q;
    Topology t = build_dumbbell(10e6, SimTime::from_seconds(0.010), q, q);

    CHECK(t.node_count() == 6);
    CHECK(t.links().size() == 10);
    CHECK(t.route(0, 3) == std::vector<int>{0, 1, 2, 3});
    CHECK(t.route(4, 5) == std::vector<int>{4, 1, 2, 5});
    CHECK(t.route(1, 2) == std::vector<int>{1, 2});
    CHECK(t.route(3, 0) == std::vector<int>{3, 2, 1, 0});
    CHECK(t.route(5, 4) == std::vector<int>{5, 2, 1, 4});
    CHECK(t.route(2, 2) == std::vector<int>{2});

    int li = t.next_hop_link(1, 3);
    CHECK(t.link(li).from == 1);
    CHECK(t.link(li).to == 2);
}

TEST_CASE("topology rejects bad nodes links and leaves unreachable pairs routeless") {
    CHECK_THROWS_AS(Topology(0), std::invalid_argument);

    QueueConfig q;
    Topology t(3);
    CHECK_THROWS_AS(t.add_duplex(0, 3, 10e6, SimTime(), q), std::invalid_argument);
    CHECK_THROWS_AS(t.add_duplex(0, 1, 0, SimTime(), q), std::invalid_argument);
    CHECK_THROWS_AS(t.add_duplex(0, 1, 10e6, SimTime::from_seconds(-1), q),
                    std::invalid_argument);

    t.add_duplex(0, 1, 10e6, SimTime(), q);
    CHECK_THROWS_AS(t.next_hop_link(0, 1), std::logic_error);
    t.compute_routes();
    CHECK(t.next_hop_link(0, 2) == -1);
    CHECK_THROWS_AS(t.route(0, 2), std::invalid_argument);
}
