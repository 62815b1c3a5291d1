#pragma once

// Shared checkers used by the unit suite and the acceptance gate.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tcpsim/sim.hpp"

namespace testsupport {

using namespace tcpsim;

// Event-count bookkeeping for one flow's data packets, from the trace alone.
struct FlowLedger {
    std::int64_t sent = 0;      // '+' at the flow's source node
    std::int64_t received = 0;  // 'r' at the flow's destination node
    std::int64_t dropped = 0;   // 'd' anywhere
    std::int64_t in_flight() const { return sent - received - dropped; }
};

inline FlowLedger flow_ledger(const std::vector<TraceRecord>& records, int fid, int src_node,
                              int dst_node) {
    FlowLedger lg;
    for (const auto& r : records) {
        if (r.fid != fid || r.pkt_type == PacketKind::Ack)
            continue;
        if (r.event == TraceEvent::Enqueue && r.from_node == src_node)
            ++lg.sent;
        else if (r.event == TraceEvent::Receive && r.to_node == dst_node)
            ++lg.received;
        else if (r.event == TraceEvent::Drop)
            ++lg.dropped;
    }
    return lg;
}

// Structural trace checks: nondecreasing clock, and per link every dequeue,
// receive, or drop is covered by a prior enqueue of the same packet id.
inline bool trace_well_ordered(const std::vector<TraceRecord>& records, std::string* why = nullptr) {
    SimTime prev;
    std::map<std::tuple<int, int, std::int64_t>, std::array<std::int64_t, 3>> per_link;
    for (const auto& r : records) {
        if (r.time < prev) {
            if (why)
                *why = "timestamps decreased at t=" + r.time.to_string();
            return false;
        }
        prev = r.time;
        auto key = std::make_tuple(r.from_node, r.to_node, r.pkt_id);
        auto& c = per_link[key];  // [enq, deq, drop]
        switch (r.event) {
            case TraceEvent::Enqueue: ++c[0]; break;
            case TraceEvent::Dequeue: ++c[1]; break;
            case TraceEvent::Drop: ++c[2]; break;
            case TraceEvent::Receive:
                if (c[1] < 1) {
                    if (why)
                        *why = "receive without dequeue, pkt " + std::to_string(r.pkt_id);
                    return false;
                }
                break;
        }
        if (c[1] + c[2] > c[0]) {
            if (why)
                *why = "dequeues+drops exceed enqueues, pkt " + std::to_string(r.pkt_id);
            return false;
        }
    }
    return true;
}

// Highest throughput seen by any window of the given width, sliding by
// `stride`, computed from deliveries at the flow's destination.
inline double max_windowed_throughput_mbps(const std::vector<TraceRecord>& records, int fid,
                                           int dst_node, double window_s, double stride_s,
                                           double duration_s) {
    std::vector<double> times;
    std::vector<std::int64_t> bytes;
    for (const auto& r : records)
        if (r.fid == fid && r.pkt_type != PacketKind::Ack && r.event == TraceEvent::Receive &&
            r.to_node == dst_node) {
            times.push_back(r.time.seconds());
            bytes.push_back(r.pkt_size);
        }
    double best = 0;
    for (double t0 = 0; t0 + window_s <= duration_s + 1e-9; t0 += stride_s) {
        auto lo = std::lower_bound(times.begin(), times.end(), t0);
        auto hi = std::lower_bound(times.begin(), times.end(), t0 + window_s);
        std::int64_t b = 0;
        for (auto it = lo; it != hi; ++it)
            b += bytes[it - times.begin()];
        best = std::max(best, static_cast<double>(b) * 8 / window_s / 1e6);
    }
    return best;
}

inline std::string render_records(const std::vector<TraceRecord>& records) {
    std::string out;
    for (const auto& r : records)
        out += emit_line(r);
    return out;
}

}  // namespace testsupport
