#ifndef TCPSIM_PACKET_HPP
#define TCPSIM_PACKET_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tcpsim/time.hpp"

namespace tcpsim {

enum class PacketKind { Tcp, Ack, Cbr };

inline const char* to_token(PacketKind k) {
    switch (k) {
    case PacketKind::Tcp: return "tcp";
    case PacketKind::Ack: return "ack";
    case PacketKind::Cbr: return "cbr";
    }
    return "tcp";
}

inline std::optional<PacketKind> kind_from_token(std::string_view s) {
    if (s == "tcp") return PacketKind::Tcp;
    if (s == "ack") return PacketKind::Ack;
    if (s == "cbr") return PacketKind::Cbr;
    return std::nullopt;
}

// Agent address: node index plus a per-node port, rendered "node.port".
struct AgentAddr {
    int node = 0;
    int port = 0;
    bool operator==(const AgentAddr&) const = default;
    std::string to_string() const { return std::to_string(node) + "." + std::to_string(port); }
};

// Half-open sequence range [begin, end), in segments.
struct SeqRange {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    bool operator==(const SeqRange&) const = default;
};

struct Packet {
    std::int64_t uid = 0;       // unique per packet instance; a retransmit gets a new uid
    std::int64_t pkt_id = 0;    // trace identity; a retransmitted segment keeps its first uid
    int flow_id = 0;
    PacketKind kind = PacketKind::Tcp;
    int size_bytes = 0;
    AgentAddr src;
    AgentAddr dst;
    std::int64_t seq = 0;       // data: segment number; ack: cumulative ack
    SimTime created_at;
    std::vector<SeqRange> sack_blocks;  // carried by acks of a sack receiver; not traced
};

// Hands out packet uids; one instance per simulation run.
class UidSource {
public:
    std::int64_t operator()() { return next_++; }

private:
    std::int64_t next_ = 0;
};

}  // namespace tcpsim

#endif
