#ifndef TCPSIM_TCP_HPP
#define TCPSIM_TCP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcpsim/engine.hpp"
#include "tcpsim/network.hpp"
#include "tcpsim/packet.hpp"
#include "tcpsim/time.hpp"

namespace tcpsim {

enum class TcpVariant { Tahoe, Reno, NewReno, Vegas, Sack };

inline const char* to_token(TcpVariant v) {
    switch (v) {
    case TcpVariant::Tahoe: return "tahoe";
    case TcpVariant::Reno: return "reno";
    case TcpVariant::NewReno: return "newreno";
    case TcpVariant::Vegas: return "vegas";
    case TcpVariant::Sack: return "sack";
    }
    return "reno";
}

inline std::optional<TcpVariant> variant_from_token(std::string_view s) {
    std::string t;
    for (char c : s)
        t += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    if (t == "tahoe") return TcpVariant::Tahoe;
    if (t == "reno") return TcpVariant::Reno;
    if (t == "newreno") return TcpVariant::NewReno;
    if (t == "vegas") return TcpVariant::Vegas;
    if (t == "sack") return TcpVariant::Sack;
    return std::nullopt;
}

// Jacobson/Karels smoothed RTT with exponential timer backoff. Samples come
// only from segments sent exactly once (Karn's rule, enforced by the caller).
class RttEstimator {
public:
    RttEstimator(double rto_init, double rto_min, double rto_max)
        : rto_(rto_init), rto_min_(rto_min), rto_max_(rto_max) {}

    void update(double sample) {
        if (!(sample > 0))
            throw std::invalid_argument("rtt sample must be positive");
        if (!has_sample_) {
            srtt_ = sample;
            rttvar_ = sample / 2;
            has_sample_ = true;
        } else {
            rttvar_ = 0.75 * rttvar_ + 0.25 * std::fabs(srtt_ - sample);
            srtt_ = 0.875 * srtt_ + 0.125 * sample;
        }
        rto_ = std::clamp(srtt_ + 4 * rttvar_, rto_min_, rto_max_);
        backoff_ = 1;
    }

    void back_off() { backoff_ = std::min(backoff_ * 2, 1e9); }

    double effective_rto() const { return std::min(rto_ * backoff_, rto_max_); }

    double srtt() const { return srtt_; }
    double rttvar() const { return rttvar_; }
    double rto() const { return rto_; }
    double backoff() const { return backoff_; }
    bool has_sample() const { return has_sample_; }

private:
    double srtt_ = 0;
    double rttvar_ = 0;
    double rto_;
    double rto_min_;
    double rto_max_;
    double backoff_ = 1;
    bool has_sample_ = false;
};

struct VegasParams {
    double alpha = 1;
    double beta = 3;
    double gamma = 1;
};

// Once-per-RTT congestion-avoidance rule: diff is the backlog the connection
// keeps in the network, in segments; hold it between alpha and beta.
inline double vegas_adjust_cwnd(double cwnd, double base_rtt, double rtt_sample,
                                const VegasParams& p) {
    if (!(rtt_sample > 0))
        throw std::invalid_argument("rtt sample must be positive");
    if (!(base_rtt > 0))
        throw std::invalid_argument("base rtt must be positive");
    double diff = cwnd * (1.0 - base_rtt / rtt_sample);
    if (diff < p.alpha)
        return cwnd + 1;
    if (diff > p.beta)
        return std::max(cwnd - 1, 2.0);
    return cwnd;
}

struct TcpConfig {
    TcpVariant variant = TcpVariant::Reno;
    int segment_size = 1000;
    int ack_size = 40;
    int rcv_wnd = 64;  // segments
    double initial_cwnd = 1;
    double initial_ssthresh = 64;
    double rto_initial = 1.0;
    double rto_min = 0.2;
    double rto_max = 64.0;
    VegasParams vegas;

    void validate() const {
        if (segment_size <= 0 || ack_size <= 0)
            throw std::invalid_argument("packet sizes must be positive");
        if (rcv_wnd < 1)
            throw std::invalid_argument("receiver window must be at least one segment");
        if (initial_cwnd < 1 || initial_ssthresh < 2)
            throw std::invalid_argument("initial cwnd/ssthresh below protocol floor");
        if (!(rto_min > 0 && rto_min <= rto_max && rto_initial > 0))
            throw std::invalid_argument("bad rto bounds");
        if (!(vegas.alpha > 0 && vegas.alpha <= vegas.beta && vegas.gamma > 0))
            throw std::invalid_argument("bad vegas thresholds");
    }
};

enum class TcpPhase { SlowStart, CongestionAvoidance, FastRecovery };

inline const char* to_token(TcpPhase p) {
    switch (p) {
    case TcpPhase::SlowStart: return "slow-start";
    case TcpPhase::CongestionAvoidance: return "congestion-avoidance";
    case TcpPhase::FastRecovery: return "fast-recovery";
    }
    return "?";
}

struct TcpSenderStats {
    std::int64_t segments_sent = 0;  // packet instances, retransmissions included
    std::int64_t retransmits = 0;
    std::int64_t fast_retransmits = 0;
    std::int64_t timeouts = 0;
    std::int64_t ssthresh_reductions = 0;
    std::int64_t partial_acks = 0;  // NewReno/Sack partial ACKs handled inside recovery
    std::int64_t new_acks = 0;
    std::int64_t dupacks = 0;
    std::int64_t rtt_samples = 0;
};

// One TCP connection's send side, fed by an unlimited (FTP-style) source:
// there is always data to send, so the window alone paces the flow.
class TcpSender {
public:
    TcpSender(Engine& engine, Network& net, UidSource& uids, TcpConfig cfg, int flow_id,
              AgentAddr src, AgentAddr dst)
        : engine_(engine),
          net_(net),
          uids_(uids),
          cfg_(cfg),
          flow_id_(flow_id),
          src_(src),
          dst_(dst),
          cwnd_(cfg.initial_cwnd),
          ssthresh_(cfg.initial_ssthresh),
          rtt_(cfg.rto_initial, cfg.rto_min, cfg.rto_max) {
        cfg_.validate();
        net_.register_agent(src_, [this](const Packet& p) { on_packet(p); });
    }

    void start(SimTime at) {
        if (at < engine_.now())
            throw std::invalid_argument("sender start time in the past");
        engine_.schedule(at - engine_.now(), [this] { fill_window(); });
    }

    void on_packet(const Packet& pkt) {
        if (pkt.kind != PacketKind::Ack)
            return;
        std::int64_t a = pkt.seq;
        if (a > snd_max_)
            throw SimInvariantError("ack beyond highest sequence sent");
        if (cfg_.variant == TcpVariant::Sack && !pkt.sack_blocks.empty())
            apply_sack(pkt.sack_blocks);
        if (a > snd_una_)
            handle_new_ack(a);
        else if (snd_una_ < snd_max_)
            handle_dupack();
        check_invariants();
    }

    double cwnd() const { return cwnd_; }
    double ssthresh() const { return ssthresh_; }
    TcpPhase phase() const { return phase_; }
    std::int64_t snd_una() const { return snd_una_; }
    std::int64_t snd_nxt() const { return snd_nxt_; }
    std::int64_t snd_max() const { return snd_max_; }
    int dupacks() const { return dupacks_; }
    const RttEstimator& rtt() const { return rtt_; }
    double vegas_base_rtt() const { return base_rtt_; }
    const TcpSenderStats& stats() const { return stats_; }
    const TcpConfig& config() const { return cfg_; }
    int flow_id() const { return flow_id_; }
    AgentAddr addr() const { return src_; }

private:
    struct SegMeta {
        SimTime first_sent;
        SimTime last_sent;
        std::int64_t first_uid = 0;  // trace identity kept across retransmits
        int rtx = 0;
        bool sacked = false;
    };

    std::int64_t usable_window() const {
        std::int64_t wnd = std::min(static_cast<std::int64_t>(std::floor(cwnd_)),
                                    static_cast<std::int64_t>(cfg_.rcv_wnd));
        return wnd - (snd_nxt_ - snd_una_);
    }

    void fill_window() {
        while (usable_window() > 0) {
            send_segment(snd_nxt_);
            ++snd_nxt_;
            snd_max_ = std::max(snd_max_, snd_nxt_);
        }
        ensure_timer();
    }

    void send_segment(std::int64_t seq) {
        Packet p;
        p.uid = uids_();
        p.pkt_id = p.uid;
        p.flow_id = flow_id_;
        p.kind = PacketKind::Tcp;
        p.size_bytes = cfg_.segment_size;
        p.src = src_;
        p.dst = dst_;
        p.seq = seq;
        p.created_at = engine_.now();
        auto [it, fresh] = segs_.try_emplace(seq);
        it->second.last_sent = engine_.now();
        if (fresh) {
            it->second.first_sent = engine_.now();
            it->second.first_uid = p.uid;
            if (timed_seq_ < 0) {
                timed_seq_ = seq;
                timed_sent_ = engine_.now();
            }
        } else {
            p.pkt_id = it->second.first_uid;
            ++it->second.rtx;
            ++stats_.retransmits;
            if (timed_seq_ == seq)
                timed_seq_ = -1;  // Karn: never time a retransmitted segment
        }
        ++stats_.segments_sent;
        net_.inject(p, src_.node);
    }

    void handle_new_ack(std::int64_t a) {
        ++stats_.new_acks;
        std::int64_t acked = a - snd_una_;
        if (timed_seq_ >= 0 && a > timed_seq_) {
            double s = (engine_.now() - timed_sent_).seconds();
            rtt_.update(s);
            ++stats_.rtt_samples;
            last_rtt_ = s;
            if (s < base_rtt_)
                base_rtt_ = s;
            timed_seq_ = -1;
        }
        segs_.erase(segs_.begin(), segs_.lower_bound(a));
        snd_una_ = a;
        snd_nxt_ = std::max(snd_nxt_, a);
        dupacks_ = 0;

        if (phase_ == TcpPhase::FastRecovery) {
            bool full_ack = true;
            if (cfg_.variant == TcpVariant::NewReno || cfg_.variant == TcpVariant::Sack)
                full_ack = a >= recover_;
            if (full_ack) {
                cwnd_ = ssthresh_;
                phase_ = TcpPhase::CongestionAvoidance;
            } else if (cfg_.variant == TcpVariant::NewReno) {
                ++stats_.partial_acks;
                cwnd_ = std::max(cwnd_ - static_cast<double>(acked), 1.0);
                send_segment(snd_una_);  // next hole
            } else {
                ++stats_.partial_acks;  // Sack: scoreboard drives retransmission below
            }
        } else if (cfg_.variant == TcpVariant::Vegas) {
            vegas_on_new_ack(a);
        } else {
            if (phase_ == TcpPhase::SlowStart && cwnd_ >= ssthresh_)
                phase_ = TcpPhase::CongestionAvoidance;
            if (phase_ == TcpPhase::SlowStart)
                cwnd_ += 1;
            else
                cwnd_ += 1.0 / cwnd_;
        }

        if (snd_una_ == snd_max_)
            cancel_timer();
        else
            restart_timer();
        if (phase_ == TcpPhase::FastRecovery && cfg_.variant == TcpVariant::Sack)
            sack_fill();
        else
            fill_window();
    }

    void handle_dupack() {
        ++stats_.dupacks;
        if (cfg_.variant == TcpVariant::Vegas) {
            ++dupacks_;
            vegas_check_expired(dupacks_ == 3);
            return;
        }
        if (phase_ == TcpPhase::FastRecovery) {
            if (cfg_.variant == TcpVariant::Sack) {
                sack_fill();
            } else {
                cwnd_ += 1;  // inflation: the dupack signals a packet left the network
                fill_window();
            }
            return;
        }
        ++dupacks_;
        if (dupacks_ != 3)
            return;

        std::int64_t flight = snd_max_ - snd_una_;
        ssthresh_ = std::max(static_cast<double>(flight) / 2, 2.0);
        ++stats_.ssthresh_reductions;
        if (cfg_.variant == TcpVariant::Tahoe) {
            cwnd_ = 1;
            phase_ = TcpPhase::SlowStart;
            send_segment(snd_una_);
            restart_timer();
            return;
        }
        phase_ = TcpPhase::FastRecovery;
        recover_ = snd_max_;
        cwnd_ = ssthresh_ + 3;
        ++stats_.fast_retransmits;
        send_segment(snd_una_);
        restart_timer();
        if (cfg_.variant == TcpVariant::Sack)
            sack_fill();
        else
            fill_window();
    }

    void on_timeout() {
        if (snd_una_ >= snd_max_)
            throw SimInvariantError("retransmission timer fired with nothing outstanding");
        ++stats_.timeouts;
        std::int64_t flight = snd_max_ - snd_una_;
        ssthresh_ = std::max(static_cast<double>(flight) / 2, 2.0);
        ++stats_.ssthresh_reductions;
        cwnd_ = 1;
        phase_ = TcpPhase::SlowStart;
        dupacks_ = 0;
        rtt_.back_off();
        snd_nxt_ = snd_una_;  // go-back-n: resend from the hole forward
        timed_seq_ = -1;
        if (cfg_.variant == TcpVariant::Sack) {
            for (auto& [seq, m] : segs_)
                m.sacked = false;
            highest_sacked_ = -1;
        }
        if (cfg_.variant == TcpVariant::Vegas) {
            vegas_grow_ = true;
            vegas_epoch_end_ = snd_una_ + 1;
        }
        fill_window();
    }

    // Timeout the estimator would use without the coarse floor; losses can be
    // declared a fraction of a second earlier than the clamped timer allows.
    double vegas_fine_timeout() const {
        return rtt_.has_sample() ? rtt_.srtt() + 4 * rtt_.rttvar()
                                 : rtt_.effective_rto();
    }

    // Delay-based loss response: a duplicate ACK (or one of the first two new
    // ACKs after a retransmission) retransmits the oldest segment once it has
    // outlived the fine-grained timer, instead of waiting for the third
    // duplicate or the coarse timeout. The window shrinks by a quarter, at
    // most once per round trip, since early detection makes halving an
    // overreaction. The third duplicate still forces a retransmission of a
    // segment that has never been retried, as a fallback when samples are too
    // noisy for the fine timer to have expired.
    void vegas_check_expired(bool third_dup) {
        auto it = segs_.find(snd_una_);
        if (it == segs_.end())
            return;
        double fine = vegas_fine_timeout();
        bool expired = (engine_.now() - it->second.last_sent).seconds() > fine;
        if (!expired && !(third_dup && it->second.rtx == 0))
            return;
        send_segment(snd_una_);
        restart_timer();
        ++stats_.fast_retransmits;
        vegas_ack_check_ = 2;
        double rtt_window = rtt_.has_sample() ? rtt_.srtt() : fine;
        if ((engine_.now() - vegas_cut_at_).seconds() > rtt_window || !vegas_cut_) {
            cwnd_ = std::max(cwnd_ * 0.75, 2.0);
            ssthresh_ = std::max(cwnd_, 2.0);
            ++stats_.ssthresh_reductions;
            phase_ = TcpPhase::CongestionAvoidance;
            vegas_cut_at_ = engine_.now();
            vegas_cut_ = true;
        }
    }

    void vegas_on_new_ack(std::int64_t a) {
        if (vegas_ack_check_ > 0) {
            --vegas_ack_check_;
            if (snd_una_ < snd_max_)
                vegas_check_expired(false);
        }
        if (phase_ == TcpPhase::SlowStart) {
            if (cwnd_ >= ssthresh_)
                phase_ = TcpPhase::CongestionAvoidance;
            else if (vegas_grow_)
                cwnd_ += 1;
        }
        if (a < vegas_epoch_end_)
            return;  // one adjustment per round trip
        if (last_rtt_ > 0 && base_rtt_ < 1e30) {
            double diff = cwnd_ * (1.0 - base_rtt_ / last_rtt_);
            if (phase_ == TcpPhase::SlowStart) {
                if (diff > cfg_.vegas.gamma)
                    phase_ = TcpPhase::CongestionAvoidance;
                else
                    vegas_grow_ = !vegas_grow_;
            } else if (phase_ == TcpPhase::CongestionAvoidance) {
                cwnd_ = vegas_adjust_cwnd(cwnd_, base_rtt_, last_rtt_, cfg_.vegas);
            }
        } else if (phase_ == TcpPhase::SlowStart) {
            vegas_grow_ = !vegas_grow_;
        }
        vegas_epoch_end_ = snd_nxt_;
    }

    void apply_sack(const std::vector<SeqRange>& blocks) {
        for (const auto& b : blocks) {
            for (std::int64_t s = std::max(b.begin, snd_una_); s < b.end; ++s) {
                auto it = segs_.find(s);
                if (it != segs_.end())
                    it->second.sacked = true;
                highest_sacked_ = std::max(highest_sacked_, s);
            }
        }
    }

    bool sack_lost(std::int64_t seq) const { return highest_sacked_ - seq >= 3; }

    std::int64_t sack_pipe() const {
        std::int64_t pipe = 0;
        for (const auto& [seq, m] : segs_) {
            if (m.sacked)
                continue;
            if (m.rtx > 0 || !sack_lost(seq))
                ++pipe;
        }
        return pipe;
    }

    void sack_fill() {
        while (sack_pipe() < static_cast<std::int64_t>(std::floor(cwnd_))) {
            std::int64_t hole = -1;
            for (const auto& [seq, m] : segs_) {
                if (!m.sacked && m.rtx == 0 && sack_lost(seq)) {
                    hole = seq;
                    break;
                }
            }
            if (hole >= 0) {
                send_segment(hole);
            } else if (snd_nxt_ - snd_una_ < static_cast<std::int64_t>(cfg_.rcv_wnd)) {
                send_segment(snd_nxt_);
                ++snd_nxt_;
                snd_max_ = std::max(snd_max_, snd_nxt_);
            } else {
                break;
            }
        }
        ensure_timer();
    }

    void ensure_timer() {
        if (!timer_armed_ && snd_una_ < snd_max_)
            restart_timer();
    }

    void restart_timer() {
        cancel_timer();
        timer_ = engine_.schedule(SimTime::from_seconds(rtt_.effective_rto()), [this] {
            timer_armed_ = false;
            on_timeout();
        });
        timer_armed_ = true;
    }

    void cancel_timer() {
        if (timer_armed_) {
            engine_.cancel(timer_);
            timer_armed_ = false;
        }
    }

    void check_invariants() const {
        if (cwnd_ < 1)
            throw SimInvariantError("cwnd below one segment");
        if (ssthresh_ < 2)
            throw SimInvariantError("ssthresh below two segments");
        if (snd_una_ > snd_nxt_ || snd_nxt_ > snd_max_)
            throw SimInvariantError("sequence pointers out of order");
        if (cfg_.variant == TcpVariant::Tahoe && phase_ == TcpPhase::FastRecovery)
            throw SimInvariantError("tahoe entered fast recovery");
    }

    Engine& engine_;
    Network& net_;
    UidSource& uids_;
    TcpConfig cfg_;
    int flow_id_;
    AgentAddr src_;
    AgentAddr dst_;

    double cwnd_;
    double ssthresh_;
    TcpPhase phase_ = TcpPhase::SlowStart;
    int dupacks_ = 0;
    std::int64_t snd_una_ = 0;
    std::int64_t snd_nxt_ = 0;
    std::int64_t snd_max_ = 0;
    std::int64_t recover_ = 0;
    std::map<std::int64_t, SegMeta> segs_;

    RttEstimator rtt_;
    std::int64_t timed_seq_ = -1;
    SimTime timed_sent_;

    double base_rtt_ = 1e30;
    double last_rtt_ = 0;
    bool vegas_grow_ = true;
    std::int64_t vegas_epoch_end_ = 1;
    SimTime vegas_cut_at_;
    bool vegas_cut_ = false;
    int vegas_ack_check_ = 0;

    std::int64_t highest_sacked_ = -1;

    EventHandle timer_;
    bool timer_armed_ = false;

    TcpSenderStats stats_;
};

// Receive side: cumulative immediate ACKs, out-of-order buffering, and (when
// enabled) the three most recent contiguous blocks echoed back for SACK.
class TcpReceiver {
public:
    TcpReceiver(Engine& engine, Network& net, UidSource& uids, int flow_id, AgentAddr addr,
                AgentAddr peer, int ack_size, bool sack_enabled)
        : engine_(engine),
          net_(net),
          uids_(uids),
          flow_id_(flow_id),
          addr_(addr),
          peer_(peer),
          ack_size_(ack_size),
          sack_enabled_(sack_enabled) {
        net_.register_agent(addr_, [this](const Packet& p) { on_packet(p); });
    }

    void on_packet(const Packet& pkt) {
        if (pkt.kind != PacketKind::Tcp)
            return;
        ++data_received_;
        bytes_received_ += pkt.size_bytes;
        std::int64_t s = pkt.seq;
        if (s == rcv_nxt_) {
            deliver(rcv_nxt_);
            while (oo_.erase(rcv_nxt_) == 1)
                deliver(rcv_nxt_);
        } else if (s > rcv_nxt_) {
            oo_.insert(s);
        } else {
            ++duplicates_;
        }
        if (sack_enabled_)
            update_blocks(s);
        send_ack();
    }

    std::int64_t rcv_nxt() const { return rcv_nxt_; }
    const std::vector<std::int64_t>& delivery_log() const { return log_; }
    const std::vector<SeqRange>& sack_blocks() const { return blocks_; }
    std::int64_t data_received() const { return data_received_; }
    std::int64_t bytes_received() const { return bytes_received_; }
    std::int64_t duplicates() const { return duplicates_; }
    std::int64_t acks_sent() const { return acks_sent_; }
    AgentAddr addr() const { return addr_; }

private:
    void deliver(std::int64_t seq) {
        log_.push_back(seq);
        ++rcv_nxt_;
    }

    void update_blocks(std::int64_t s) {
        // Drop or clip blocks the cumulative ACK has overtaken.
        std::vector<SeqRange> kept;
        for (auto& b : blocks_) {
            SeqRange c{std::max(b.begin, rcv_nxt_), b.end};
            if (c.begin < c.end)
                kept.push_back(c);
        }
        blocks_ = std::move(kept);
        if (s >= rcv_nxt_ && oo_.count(s)) {
            // Contiguous run around s, freshest block first.
            std::int64_t lo = s;
            while (oo_.count(lo - 1))
                --lo;
            std::int64_t hi = s + 1;
            while (oo_.count(hi))
                ++hi;
            std::vector<SeqRange> next{SeqRange{lo, hi}};
            for (auto& b : blocks_)
                if (b.end < lo || b.begin > hi)
                    next.push_back(b);
            if (next.size() > 3)
                next.resize(3);
            blocks_ = std::move(next);
        }
    }

    void send_ack() {
        Packet a;
        a.uid = uids_();
        a.pkt_id = a.uid;
        a.flow_id = flow_id_;
        a.kind = PacketKind::Ack;
        a.size_bytes = ack_size_;
        a.src = addr_;
        a.dst = peer_;
        a.seq = rcv_nxt_;
        a.created_at = engine_.now();
        a.sack_blocks = blocks_;
        ++acks_sent_;
        net_.inject(a, addr_.node);
    }

    Engine& engine_;
    Network& net_;
    UidSource& uids_;
    int flow_id_;
    AgentAddr addr_;
    AgentAddr peer_;
    int ack_size_;
    bool sack_enabled_;

    std::int64_t rcv_nxt_ = 0;
    std::set<std::int64_t> oo_;
    std::vector<SeqRange> blocks_;
    std::vector<std::int64_t> log_;
    std::int64_t data_received_ = 0;
    std::int64_t bytes_received_ = 0;
    std::int64_t duplicates_ = 0;
    std::int64_t acks_sent_ = 0;
};

}  // namespace tcpsim

#endif
