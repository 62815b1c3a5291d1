#ifndef TCPSIM_QUEUE_HPP
#define TCPSIM_QUEUE_HPP

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>

#include "tcpsim/packet.hpp"
#include "tcpsim/rng.hpp"
#include "tcpsim/time.hpp"

namespace tcpsim {

enum class QueueKind { DropTail, Red };

inline const char* to_token(QueueKind k) {
    return k == QueueKind::DropTail ? "droptail" : "red";
}

inline std::optional<QueueKind> queue_kind_from_token(std::string_view s) {
    if (s == "droptail" || s == "DropTail") return QueueKind::DropTail;
    if (s == "red" || s == "RED") return QueueKind::Red;
    return std::nullopt;
}

struct RedParams {
    double min_th = 5;
    double max_th = 15;
    double max_p = 0.02;
    double w_q = 0.002;
    int mean_pkt_bytes = 1000;  // sets the idle-decay timescale
};

struct QueueConfig {
    QueueKind kind = QueueKind::DropTail;
    int limit = 100;
    RedParams red;

    void validate() const {
        if (limit <= 0)
            throw std::invalid_argument("queue limit must be positive");
        if (kind == QueueKind::Red) {
            if (!(red.min_th > 0 && red.min_th < red.max_th && red.max_th <= limit))
                throw std::invalid_argument("RED thresholds must satisfy 0 < min_th < max_th <= limit");
            if (!(red.max_p > 0 && red.max_p <= 1))
                throw std::invalid_argument("RED max_p must be in (0, 1]");
            if (!(red.w_q > 0 && red.w_q < 1))
                throw std::invalid_argument("RED w_q must be in (0, 1)");
        }
    }
};

struct RedState {
    double avg = 0;
    int count = 0;  // packets admitted since the last drop, in the early-drop band
    std::optional<SimTime> idle_since = SimTime();  // queue starts idle at t=0
};

enum class AdmitDecision { Admit, EarlyDrop, ForcedDrop };

// EWMA of queue length, applied on every arrival before the drop decision.
// After an idle period the average decays as if m small packets had crossed
// an empty queue, where m = idle time / typical one-packet transmission time.
inline double red_update_avg(RedState& st, const RedParams& p, int occupancy, SimTime now,
                             SimTime typical_tx) {
    if (occupancy > 0) {
        st.avg = (1.0 - p.w_q) * st.avg + p.w_q * occupancy;
    } else if (st.idle_since && typical_tx > SimTime()) {
        double m = static_cast<double>((now - *st.idle_since).ns()) /
                   static_cast<double>(typical_tx.ns());
        if (m > 0)
            st.avg *= std::pow(1.0 - p.w_q, m);
    }
    return st.avg;
}

// Drop decision for one arrival. The caller supplies the uniform draw only
// when asked (lazily), so random-stream consumption does not depend on queue
// state transitions elsewhere. The physical limit wins over the avg bands:
// a full queue force-drops even while avg < min_th.
template <typename DrawFn>
AdmitDecision red_admit(RedState& st, const RedParams& p, int occupancy, int limit, DrawFn&& draw) {
    if (occupancy >= limit) {
        st.count = 0;
        return AdmitDecision::ForcedDrop;
    }
    if (st.avg < p.min_th) {
        st.count = 0;
        return AdmitDecision::Admit;
    }
    if (st.avg >= p.max_th) {
        st.count = 0;
        return AdmitDecision::ForcedDrop;
    }
    double p_b = p.max_p * (st.avg - p.min_th) / (p.max_th - p.min_th);
    double p_a;
    if (st.count * p_b >= 1.0)
        p_a = 1.0;
    else
        p_a = p_b / (1.0 - st.count * p_b);
    if (p_a < p_b)
        p_a = p_b;
    if (p_a > 1.0)
        p_a = 1.0;
    if (draw() < p_a) {
        st.count = 0;
        return AdmitDecision::EarlyDrop;
    }
    ++st.count;
    return AdmitDecision::Admit;
}

// FIFO egress queue for one directed link, DropTail or RED.
class LinkQueue {
public:
    LinkQueue(QueueConfig cfg, SimTime typical_tx) : cfg_(cfg), typical_tx_(typical_tx) {
        cfg_.validate();
    }

    AdmitDecision offer(const Packet& pkt, SimTime now, SplitMix64& rng) {
        ++offered_;
        AdmitDecision d;
        if (cfg_.kind == QueueKind::DropTail) {
            d = occupancy() >= cfg_.limit ? AdmitDecision::ForcedDrop : AdmitDecision::Admit;
        } else {
            red_update_avg(red_, cfg_.red, occupancy(), now, typical_tx_);
            d = red_admit(red_, cfg_.red, occupancy(), cfg_.limit,
                          [&rng] { return rng.uniform01(); });
        }
        switch (d) {
        case AdmitDecision::Admit:
            q_.push_back(pkt);
            red_.idle_since.reset();
            ++admitted_;
            break;
        case AdmitDecision::EarlyDrop:
            ++early_drops_;
            break;
        case AdmitDecision::ForcedDrop:
            ++forced_drops_;
            break;
        }
        return d;
    }

    std::optional<Packet> pop(SimTime now) {
        if (q_.empty())
            return std::nullopt;
        Packet p = q_.front();
        q_.pop_front();
        if (q_.empty())
            red_.idle_since = now;
        return p;
    }

    int occupancy() const { return static_cast<int>(q_.size()); }
    const QueueConfig& config() const { return cfg_; }
    const RedState& red_state() const { return red_; }

    std::int64_t offered() const { return offered_; }
    std::int64_t admitted() const { return admitted_; }
    std::int64_t early_drops() const { return early_drops_; }
    std::int64_t forced_drops() const { return forced_drops_; }
    std::int64_t dropped() const { return early_drops_ + forced_drops_; }

private:
    QueueConfig cfg_;
    SimTime typical_tx_;
    std::deque<Packet> q_;
    RedState red_;
    std::int64_t offered_ = 0;
    std::int64_t admitted_ = 0;
    std::int64_t early_drops_ = 0;
    std::int64_t forced_drops_ = 0;
};

}  // namespace tcpsim

#endif
