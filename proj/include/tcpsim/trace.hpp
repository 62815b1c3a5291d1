#ifndef TCPSIM_TRACE_HPP
#define TCPSIM_TRACE_HPP

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tcpsim/engine.hpp"
#include "tcpsim/packet.hpp"
#include "tcpsim/time.hpp"

namespace tcpsim {

enum class TraceEvent : char {
    Enqueue = '+',   // packet enters a queue
    Dequeue = '-',   // packet exits a queue
    Receive = 'r',   // packet received by a node
    Drop = 'd',      // packet dropped
};

// One line of the trace file:
//   event time from to type size flags fid src dst seq pktid
struct TraceRecord {
    TraceEvent event = TraceEvent::Enqueue;
    SimTime time;
    int from_node = 0;
    int to_node = 0;
    PacketKind pkt_type = PacketKind::Tcp;
    int pkt_size = 0;
    std::string flags = "-------";
    int fid = 0;
    AgentAddr src;
    AgentAddr dst;
    std::int64_t seq_num = 0;
    std::int64_t pkt_id = 0;

    bool operator==(const TraceRecord&) const = default;
};

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(int line_no, std::string field, const std::string& message)
        : std::runtime_error("trace line " + std::to_string(line_no) + ", field '" + field +
                             "': " + message),
          line_no_(line_no),
          field_(std::move(field)) {}

    int line_no() const { return line_no_; }
    const std::string& field() const { return field_; }

private:
    int line_no_;
    std::string field_;
};

inline std::string emit_line(const TraceRecord& r) {
    std::string out;
    out.reserve(64);
    out += static_cast<char>(r.event);
    out += ' ';
    out += r.time.to_string();
    out += ' ';
    out += std::to_string(r.from_node);
    out += ' ';
    out += std::to_string(r.to_node);
    out += ' ';
    out += to_token(r.pkt_type);
    out += ' ';
    out += std::to_string(r.pkt_size);
    out += ' ';
    out += r.flags;
    out += ' ';
    out += std::to_string(r.fid);
    out += ' ';
    out += r.src.to_string();
    out += ' ';
    out += r.dst.to_string();
    out += ' ';
    out += std::to_string(r.seq_num);
    out += ' ';
    out += std::to_string(r.pkt_id);
    out += '\n';
    return out;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename Int>
Int parse_int(std::string_view s, int line_no, const char* field, Int min_value) {
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw TraceParseError(line_no, field, "not an integer: '" + std::string(s) + "'");
    if (v < min_value)
        throw TraceParseError(line_no, field, "value out of range: '" + std::string(s) + "'");
    return v;
}

inline AgentAddr parse_addr(std::string_view s, int line_no, const char* field) {
    std::size_t dot = s.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 >= s.size())
        throw TraceParseError(line_no, field, "expected node.port: '" + std::string(s) + "'");
    AgentAddr a;
    a.node = parse_int<int>(s.substr(0, dot), line_no, field, 0);
    a.port = parse_int<int>(s.substr(dot + 1), line_no, field, 0);
    return a;
}

}  // namespace detail

inline TraceRecord parse_line(std::string_view line, int line_no = 1) {
    auto f = detail::split_ws(line);
    if (f.size() != 12)
        throw TraceParseError(line_no, "line",
                              "expected 12 fields, got " + std::to_string(f.size()));
    TraceRecord r;

    if (f[0].size() != 1 || (f[0][0] != '+' && f[0][0] != '-' && f[0][0] != 'r' && f[0][0] != 'd'))
        throw TraceParseError(line_no, "event", "unknown event '" + std::string(f[0]) + "'");
    r.event = static_cast<TraceEvent>(f[0][0]);

    try {
        r.time = SimTime::from_string(std::string(f[1]));
    } catch (const std::invalid_argument& e) {
        throw TraceParseError(line_no, "time", e.what());
    }
    if (r.time < SimTime())
        throw TraceParseError(line_no, "time", "negative time");

    r.from_node = detail::parse_int<int>(f[2], line_no, "from_node", 0);
    r.to_node = detail::parse_int<int>(f[3], line_no, "to_node", 0);

    auto kind = kind_from_token(f[4]);
    if (!kind)
        throw TraceParseError(line_no, "pkt_type", "unknown type '" + std::string(f[4]) + "'");
    r.pkt_type = *kind;

    r.pkt_size = detail::parse_int<int>(f[5], line_no, "pkt_size", 1);

    for (char c : f[6])
        if (c != '-' && !(c >= 'a' && c <= 'z') && !(c >= 'A' && c <= 'Z'))
            throw TraceParseError(line_no, "flags", "bad flags field '" + std::string(f[6]) + "'");
    r.flags = std::string(f[6]);

    r.fid = detail::parse_int<int>(f[7], line_no, "fid", 0);
    r.src = detail::parse_addr(f[8], line_no, "src_addr");
    r.dst = detail::parse_addr(f[9], line_no, "dst_addr");
    r.seq_num = detail::parse_int<std::int64_t>(f[10], line_no, "seq_num", 0);
    r.pkt_id = detail::parse_int<std::int64_t>(f[11], line_no, "pkt_id", 0);
    return r;
}

// Pull-based reader; skips blank lines, reports 1-based line numbers in errors.
class TraceReader {
public:
    explicit TraceReader(std::istream& in) : in_(in) {}

    std::optional<TraceRecord> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            bool blank = true;
            for (char c : line)
                if (c != ' ' && c != '\t' && c != '\r') {
                    blank = false;
                    break;
                }
            if (blank)
                continue;
            return parse_line(line, line_no_);
        }
        return std::nullopt;
    }

    int line_no() const { return line_no_; }

private:
    std::istream& in_;
    int line_no_ = 0;
};

inline std::vector<TraceRecord> read_trace(std::istream& in) {
    TraceReader reader(in);
    std::vector<TraceRecord> out;
    while (auto r = reader.next())
        out.push_back(std::move(*r));
    return out;
}

// Collects a run's records in memory and/or streams them to a file as they
// are produced. Append order must follow simulation time.
class TraceSink {
public:
    void attach_stream(std::ostream& out) { stream_ = &out; }
    void set_collect(bool on) { collect_ = on; }

    void emit(const TraceRecord& r) {
        if (r.time < last_)
            throw SimInvariantError("trace records out of time order");
        last_ = r.time;
        if (stream_)
            *stream_ << emit_line(r);
        if (collect_)
            records_.push_back(r);
    }

    const std::vector<TraceRecord>& records() const { return records_; }
    std::vector<TraceRecord> take_records() { return std::move(records_); }

private:
    std::ostream* stream_ = nullptr;
    bool collect_ = true;
    std::vector<TraceRecord> records_;
    SimTime last_;
};

}  // namespace tcpsim

#endif
