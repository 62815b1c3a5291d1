#ifndef TCPSIM_CBR_HPP
#define TCPSIM_CBR_HPP

#include <cstdint>
#include <stdexcept>

#include "tcpsim/engine.hpp"
#include "tcpsim/network.hpp"
#include "tcpsim/packet.hpp"

namespace tcpsim {

// Constant-bit-rate source over UDP-style packets: fixed size, fixed
// inter-departure interval, no feedback.
class CbrSource {
public:
    CbrSource(Engine& engine, Network& net, UidSource& uids, int flow_id, AgentAddr src,
              AgentAddr dst, double rate_bps, int packet_size, SimTime start_at, SimTime stop_at)
        : engine_(engine),
          net_(net),
          uids_(uids),
          flow_id_(flow_id),
          src_(src),
          dst_(dst),
          packet_size_(packet_size),
          interval_(SimTime::from_seconds(packet_size * 8.0 / rate_bps)),
          start_at_(start_at),
          stop_at_(stop_at) {
        if (rate_bps <= 0 || packet_size <= 0)
            throw std::invalid_argument("cbr rate and packet size must be positive");
        if (stop_at < start_at)
            throw std::invalid_argument("cbr stop time before start time");
    }

    // `jitter` delays the first departure to decouple the source's phase from
    // other periodic clocks in the run; the interval itself stays constant.
    void arm(SimTime jitter = SimTime()) {
        if (jitter < SimTime())
            throw std::invalid_argument("cbr start jitter must be nonnegative");
        engine_.schedule(start_at_ + jitter - engine_.now(), [this] { emit(); });
    }

    SimTime interval() const { return interval_; }
    std::int64_t sent() const { return sent_; }

private:
    void emit() {
        if (engine_.now() >= stop_at_)
            return;
        Packet p;
        p.uid = uids_();
        p.pkt_id = p.uid;
        p.flow_id = flow_id_;
        p.kind = PacketKind::Cbr;
        p.size_bytes = packet_size_;
        p.src = src_;
        p.dst = dst_;
        p.seq = sent_;
        p.created_at = engine_.now();
        ++sent_;
        net_.inject(p, src_.node);
        engine_.schedule(interval_, [this] { emit(); });
    }

    Engine& engine_;
    Network& net_;
    UidSource& uids_;
    int flow_id_;
    AgentAddr src_;
    AgentAddr dst_;
    int packet_size_;
    SimTime interval_;
    SimTime start_at_;
    SimTime stop_at_;
    std::int64_t sent_ = 0;
};

// Counts whatever lands on an address; the receive side of a CBR flow.
class PacketSink {
public:
    PacketSink(Network& net, AgentAddr addr) : addr_(addr) {
        net.register_agent(addr_, [this](const Packet& p) {
            ++received_;
            bytes_ += p.size_bytes;
        });
    }

    std::int64_t received() const { return received_; }
    std::int64_t bytes() const { return bytes_; }
    AgentAddr addr() const { return addr_; }

private:
    AgentAddr addr_;
    std::int64_t received_ = 0;
    std::int64_t bytes_ = 0;
};

}  // namespace tcpsim

#endif
