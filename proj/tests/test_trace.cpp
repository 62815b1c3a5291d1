#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "tcpsim/rng.hpp"
#include "tcpsim/trace.hpp"

using namespace tcpsim;

namespace {

TraceRecord sample_record() {
    TraceRecord r;
    r.event = TraceEvent::Enqueue;
    r.time = SimTime::from_seconds(1.35576);
    r.from_node = 2;
    r.to_node = 3;
    r.pkt_type = PacketKind::Tcp;
    r.pkt_size = 1000;
    r.fid = 1;
    r.src = AgentAddr{0, 0};
    r.dst = AgentAddr{3, 0};
    r.seq_num = 29;
    r.pkt_id = 199;
    return r;
}

}  // namespace

TEST_CASE("emits the twelve-column line with a seven-dash flags field") {
    CHECK(emit_line(sample_record()) == "+ 1.35576 2 3 tcp 1000 ------- 1 0.0 3.0 29 199\n");

    TraceRecord a = sample_record();
    a.event = TraceEvent::Receive;
    a.time = SimTime::from_seconds(1.3556);
    a.from_node = 3;
    a.to_node = 2;
    a.pkt_type = PacketKind::Ack;
    a.pkt_size = 40;
    a.src = AgentAddr{3, 0};
    a.dst = AgentAddr{0, 0};
    a.seq_num = 15;
    a.pkt_id = 201;
    CHECK(emit_line(a) == "r 1.3556 3 2 ack 40 ------- 1 3.0 0.0 15 201\n");

    TraceRecord c = sample_record();
    c.event = TraceEvent::Drop;
    c.pkt_type = PacketKind::Cbr;
    c.fid = 2;
    c.src = AgentAddr{1, 0};
    c.dst = AgentAddr{3, 1};
    CHECK(emit_line(c) == "d 1.35576 2 3 cbr 1000 ------- 2 1.0 3.1 29 199\n");
}

TEST_CASE("parses externally produced lines with five-dash flags") {
    const char* text =
        "r 1.3556 3 2 ack 40 ----- 1 3.0 0.0 15 201\n"
        "+ 1.3556 2 0 ack 40 ----- 1 3.0 0.0 15 201\n"
        "- 1.3556 2 0 ack 40 ----- 1 3.0 0.0 15 201\n"
        "r 1.35576 0 2 tcp 1000 ----- 1 0.0 3.0 29 199\n"
        "+ 1.35576 2 3 tcp 1000 ----- 1 0.0 3.0 29 199\n"
        "d 1.35576 2 3 tcp 1000 ----- 1 0.0 3.0 29 199\n"
        "+ 1.356 1 2 cbr 1000 ----- 2 1.0 3.1 157 207\n"
        "- 1.356 1 2 cbr 1000 ----- 2 1.0 3.1 157 207\n";
    std::istringstream in(text);
    auto recs = read_trace(in);
    REQUIRE(recs.size() == 8);

    CHECK(recs[0].event == TraceEvent::Receive);
    CHECK(recs[0].time == SimTime::from_seconds(1.3556));
    CHECK(recs[0].from_node == 3);
    CHECK(recs[0].to_node == 2);
    CHECK(recs[0].pkt_type == PacketKind::Ack);
    CHECK(recs[0].pkt_size == 40);
    CHECK(recs[0].fid == 1);
    CHECK(recs[0].src.node == 3);
    CHECK(recs[0].src.port == 0);
    CHECK(recs[0].dst.node == 0);
    CHECK(recs[0].seq_num == 15);
    CHECK(recs[0].pkt_id == 201);

    CHECK(recs[2].event == TraceEvent::Dequeue);
    CHECK(recs[5].event == TraceEvent::Drop);

    CHECK(recs[6].pkt_type == PacketKind::Cbr);
    CHECK(recs[6].fid == 2);
    CHECK(recs[6].src.node == 1);
    CHECK(recs[6].dst.node == 3);
    CHECK(recs[6].dst.port == 1);
    CHECK(recs[6].seq_num == 157);
    CHECK(recs[6].pkt_id == 207);
    CHECK(recs[6].time == SimTime::from_seconds(1.356));
}

TEST_CASE("rejects malformed lines with position and field context") {
    auto bad = [](const char* line) { return parse_line(line, 7); };
    CHECK_THROWS_AS(bad("x 1.0 2 3 tcp 1000 ----- 1 0.0 3.0 29 199"), TraceParseError);
    CHECK_THROWS_AS(bad("+ 1.0 2 3 tcp 1000 ----- 1 0.0 3.0 29"), TraceParseError);
    CHECK_THROWS_AS(bad("+ abc 2 3 tcp 1000 ----- 1 0.0 3.0 29 199"), TraceParseError);
    CHECK_THROWS_AS(bad("+ 1.0 2 3 udp 1000 ----- 1 0.0 3.0 29 199"), TraceParseError);
    CHECK_THROWS_AS(bad("+ 1.0 2 3 tcp -5 ----- 1 0.0 3.0 29 199"), TraceParseError);
    CHECK_THROWS_AS(bad("+ 1.0 2 3 tcp 1000 ----- 1 0 3.0 29 199"), TraceParseError);
    CHECK_THROWS_AS(bad("+ 1.0 2 3 tcp 1000 ----- 1 0.0 3.0 29 199 extra"), TraceParseError);
    try {
        bad("+ 1.0 2 3 tcp 1000 ----- 1 0.0 3.0 xx 199");
        FAIL("expected a parse error");
    } catch (const TraceParseError& e) {
        CHECK(e.line_no() == 7);
        CHECK(e.field() == "seq_num");
    }
}

TEST_CASE("ten thousand random records survive an emit and parse round trip") {
    SplitMix64 rng(2024);
    std::vector<TraceRecord> recs;
    recs.reserve(10000);
    const TraceEvent events[] = {TraceEvent::Enqueue, TraceEvent::Dequeue, TraceEvent::Receive,
                                 TraceEvent::Drop};
    const PacketKind kinds[] = {PacketKind::Tcp, PacketKind::Ack, PacketKind::Cbr};
    for (int i = 0; i < 10000; ++i) {
        TraceRecord r;
        r.event = events[rng.next() % 4];
        r.time = SimTime::from_ns(static_cast<std::int64_t>(rng.next() % 40'000'000'000ull));
        r.from_node = static_cast<int>(rng.next() % 6);
        r.to_node = static_cast<int>(rng.next() % 6);
        r.pkt_type = kinds[rng.next() % 3];
        r.pkt_size = static_cast<int>(rng.next() % 1500) + 1;
        r.fid = static_cast<int>(rng.next() % 3) + 1;
        r.src = AgentAddr{static_cast<int>(rng.next() % 6), static_cast<int>(rng.next() % 2)};
        r.dst = AgentAddr{static_cast<int>(rng.next() % 6), static_cast<int>(rng.next() % 2)};
        r.seq_num = static_cast<std::int64_t>(rng.next() % 1'000'000);
        r.pkt_id = static_cast<std::int64_t>(rng.next() % 10'000'000);
        recs.push_back(r);
    }
    std::ostringstream out;
    for (const auto& r : recs)
        out << emit_line(r);
    std::istringstream in(out.str());
    auto back = read_trace(in);
    REQUIRE(back.size() == recs.size());
    CHECK(back == recs);
    std::ostringstream out2;
    for (const auto& r : back)
        out2 << emit_line(r);
    CHECK(out2.str() == out.str());
}
