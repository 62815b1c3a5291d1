#ifndef TCPSIM_METRICS_HPP
#define TCPSIM_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tcpsim/trace.hpp"

namespace tcpsim {

// Measurement window, half-open [t0, t1) over trace timestamps.
struct Interval {
    double t0 = 0;
    double t1 = 0;

    double length() const { return t1 - t0; }
    bool contains(double t) const { return t >= t0 && t < t1; }
    void validate() const {
        if (!(t1 > t0))
            throw std::invalid_argument("empty measurement interval");
    }
};

struct DropRate {
    double fraction = 0;
    std::int64_t count = 0;
};

struct Fairness {
    std::optional<double> ratio;  // a/b, absent when b = 0
    double jain = 0;
};

struct FlowStats {
    int flow_id = 0;
    std::int64_t sent_packets = 0;      // data enqueues at the source, retransmissions included
    std::int64_t received_packets = 0;  // deliveries at the destination node
    std::int64_t dropped_packets = 0;
    double throughput_mbps = 0;
    std::optional<double> avg_latency_s;  // absent when nothing was delivered
    double drop_fraction = 0;
    Interval interval;
};

struct TimeSeriesPoint {
    double bucket_start = 0;
    std::optional<double> value;  // absent only for latency buckets with no deliveries
};

enum class MetricKind { Throughput, Latency };

namespace detail {

// A flow's endpoints as recorded in its own data packets.
struct FlowEnds {
    int src_node = -1;
    int dst_node = -1;
};

inline FlowEnds flow_ends(const std::vector<TraceRecord>& records, int flow_id) {
    for (const auto& r : records)
        if (r.fid == flow_id && r.pkt_type != PacketKind::Ack)
            return FlowEnds{r.src.node, r.dst.node};
    return FlowEnds{};
}

inline bool is_data(const TraceRecord& r, int flow_id) {
    return r.fid == flow_id && r.pkt_type != PacketKind::Ack;
}

}  // namespace detail

// Mbps of data delivered to the flow's final destination inside the window.
inline double throughput_mbps(const std::vector<TraceRecord>& records, int flow_id,
                              Interval iv) {
    iv.validate();
    auto ends = detail::flow_ends(records, flow_id);
    if (ends.dst_node < 0)
        return 0;
    std::int64_t bits = 0;
    for (const auto& r : records)
        if (detail::is_data(r, flow_id) && r.event == TraceEvent::Receive &&
            r.to_node == ends.dst_node && iv.contains(r.time.seconds()))
            bits += static_cast<std::int64_t>(r.pkt_size) * 8;
    return static_cast<double>(bits) / iv.length() / 1e6;
}

// Sends = data enqueues at the flow's source node; a retransmission enqueues
// there again (with its original pkt_id) and counts as another send.
inline std::int64_t sent_packets(const std::vector<TraceRecord>& records, int flow_id,
                                 Interval iv) {
    iv.validate();
    auto ends = detail::flow_ends(records, flow_id);
    std::int64_t sent = 0;
    for (const auto& r : records)
        if (detail::is_data(r, flow_id) && r.event == TraceEvent::Enqueue &&
            r.from_node == ends.src_node && iv.contains(r.time.seconds()))
            ++sent;
    return sent;
}

inline DropRate drop_rate(const std::vector<TraceRecord>& records, int flow_id, Interval iv) {
    iv.validate();
    DropRate out;
    for (const auto& r : records)
        if (detail::is_data(r, flow_id) && r.event == TraceEvent::Drop &&
            iv.contains(r.time.seconds()))
            ++out.count;
    std::int64_t sent = sent_packets(records, flow_id, iv);
    out.fraction = sent > 0 ? static_cast<double>(out.count) / static_cast<double>(sent) : 0.0;
    return out;
}

// Mean source-enqueue to destination-receive delay over packets delivered
// inside the window (the enqueue itself may precede it).
inline std::optional<double> avg_latency_s(const std::vector<TraceRecord>& records, int flow_id,
                                           Interval iv) {
    iv.validate();
    auto ends = detail::flow_ends(records, flow_id);
    if (ends.dst_node < 0)
        return std::nullopt;
    std::map<std::int64_t, double> enqueued_at;
    double sum = 0;
    std::int64_t n = 0;
    for (const auto& r : records) {
        if (!detail::is_data(r, flow_id))
            continue;
        if (r.event == TraceEvent::Enqueue && r.from_node == ends.src_node) {
            // A retransmitted segment repeats its pkt_id; keep the first try.
            enqueued_at.emplace(r.pkt_id, r.time.seconds());
        } else if (r.event == TraceEvent::Receive && r.to_node == ends.dst_node) {
            auto it = enqueued_at.find(r.pkt_id);
            if (it != enqueued_at.end()) {
                if (iv.contains(r.time.seconds())) {
                    sum += r.time.seconds() - it->second;
                    ++n;
                }
                enqueued_at.erase(it);  // only the first delivery counts
            }
        }
    }
    if (n == 0)
        return std::nullopt;
    return sum / static_cast<double>(n);
}

inline FlowStats flow_stats(const std::vector<TraceRecord>& records, int flow_id, Interval iv) {
    iv.validate();
    auto ends = detail::flow_ends(records, flow_id);
    FlowStats s;
    s.flow_id = flow_id;
    s.interval = iv;
    s.sent_packets = sent_packets(records, flow_id, iv);
    for (const auto& r : records) {
        if (!detail::is_data(r, flow_id) || !iv.contains(r.time.seconds()))
            continue;
        if (r.event == TraceEvent::Receive && r.to_node == ends.dst_node)
            ++s.received_packets;
        else if (r.event == TraceEvent::Drop)
            ++s.dropped_packets;
    }
    s.throughput_mbps = throughput_mbps(records, flow_id, iv);
    s.avg_latency_s = avg_latency_s(records, flow_id, iv);
    s.drop_fraction = s.sent_packets > 0
                          ? static_cast<double>(s.dropped_packets) /
                                static_cast<double>(s.sent_packets)
                          : 0.0;
    return s;
}

// Fixed-width buckets covering [0, last record time].
inline std::vector<TimeSeriesPoint> time_series(const std::vector<TraceRecord>& records,
                                                int flow_id, MetricKind metric,
                                                double bucket_width) {
    if (!(bucket_width > 0))
        throw std::invalid_argument("bucket width must be positive");
    double end = 0;
    for (const auto& r : records)
        end = std::max(end, r.time.seconds());
    std::size_t buckets = static_cast<std::size_t>(std::floor(end / bucket_width)) + 1;
    std::vector<TimeSeriesPoint> out;
    out.reserve(buckets);
    for (std::size_t i = 0; i < buckets; ++i) {
        Interval iv{static_cast<double>(i) * bucket_width,
                    static_cast<double>(i + 1) * bucket_width};
        TimeSeriesPoint p;
        p.bucket_start = iv.t0;
        if (metric == MetricKind::Throughput)
            p.value = throughput_mbps(records, flow_id, iv);
        else
            p.value = avg_latency_s(records, flow_id, iv);
        out.push_back(p);
    }
    return out;
}

// Two-flow Jain index: 1 when equal, 0.5 when one flow is starved.
inline Fairness fairness(double throughput_a, double throughput_b) {
    if (throughput_a < 0 || throughput_b < 0)
        throw std::invalid_argument("throughput must be nonnegative");
    if (throughput_a == 0 && throughput_b == 0)
        throw std::invalid_argument("fairness undefined for two idle flows");
    Fairness f;
    if (throughput_b > 0)
        f.ratio = throughput_a / throughput_b;
    double s = throughput_a + throughput_b;
    f.jain = s * s / (2 * (throughput_a * throughput_a + throughput_b * throughput_b));
    return f;
}

}  // namespace tcpsim

#endif
