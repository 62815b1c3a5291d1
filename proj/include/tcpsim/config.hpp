#ifndef TCPSIM_CONFIG_HPP
#define TCPSIM_CONFIG_HPP

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tcpsim/scenario.hpp"

namespace tcpsim {

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a number: '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config key '" + key + "': not a number: '" + v + "'");
    return x;
}

inline long long to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not an integer: '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config key '" + key + "': not an integer: '" + v + "'");
    return x;
}

inline std::string fmt_g(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

}  // namespace detail

// key=value lines; '#' starts a comment; blank lines ignored.
inline KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        std::string t = detail::trim(line);
        if (t.empty())
            continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

inline KeyValues load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file: " + path);
    return parse_key_values(in);
}

// Applies overrides onto the defaults; unknown keys are errors so typos
// cannot silently run a different experiment.
inline void apply_config(const KeyValues& kv, SimConfig& cfg, Scenario& sc) {
    using detail::to_double;
    using detail::to_int;
    for (const auto& [key, v] : kv) {
        if (key == "link_bandwidth_bps") cfg.link_bandwidth_bps = to_double(key, v);
        else if (key == "prop_delay_s") cfg.prop_delay_s = to_double(key, v);
        else if (key == "bottleneck_queue_limit") cfg.bottleneck_queue_limit = static_cast<int>(to_int(key, v));
        else if (key == "edge_queue_limit") cfg.edge_queue_limit = static_cast<int>(to_int(key, v));
        else if (key == "red_min_th") cfg.red.min_th = to_double(key, v);
        else if (key == "red_max_th") cfg.red.max_th = to_double(key, v);
        else if (key == "red_max_p") cfg.red.max_p = to_double(key, v);
        else if (key == "red_w_q") cfg.red.w_q = to_double(key, v);
        else if (key == "segment_size") cfg.tcp.segment_size = static_cast<int>(to_int(key, v));
        else if (key == "ack_size") cfg.tcp.ack_size = static_cast<int>(to_int(key, v));
        else if (key == "rcv_wnd") cfg.tcp.rcv_wnd = static_cast<int>(to_int(key, v));
        else if (key == "exp12_rcv_wnd") cfg.exp12_rcv_wnd = static_cast<int>(to_int(key, v));
        else if (key == "cbr_jitter_frac") cfg.cbr_jitter_frac = to_double(key, v);
        else if (key == "initial_cwnd") cfg.tcp.initial_cwnd = to_double(key, v);
        else if (key == "initial_ssthresh") cfg.tcp.initial_ssthresh = to_double(key, v);
        else if (key == "rto_initial_s") cfg.tcp.rto_initial = to_double(key, v);
        else if (key == "rto_min_s") cfg.tcp.rto_min = to_double(key, v);
        else if (key == "rto_max_s") cfg.tcp.rto_max = to_double(key, v);
        else if (key == "vegas_alpha") cfg.tcp.vegas.alpha = to_double(key, v);
        else if (key == "vegas_beta") cfg.tcp.vegas.beta = to_double(key, v);
        else if (key == "vegas_gamma") cfg.tcp.vegas.gamma = to_double(key, v);
        else if (key == "cbr_packet_size") cfg.cbr_packet_size = static_cast<int>(to_int(key, v));
        else if (key == "duration_s") cfg.duration_s = to_double(key, v);
        else if (key == "warmup_s") cfg.warmup_s = to_double(key, v);
        else if (key == "bucket_s") cfg.bucket_s = to_double(key, v);
        else if (key == "exp3_cbr_start_s") cfg.exp3_cbr_start_s = to_double(key, v);
        else if (key == "experiment") sc.experiment = static_cast<int>(to_int(key, v));
        else if (key == "variant") {
            auto t = variant_from_token(v);
            if (!t) throw std::invalid_argument("config key 'variant': unknown variant '" + v + "'");
            sc.variant_a = *t;
        } else if (key == "variant_b") {
            auto t = variant_from_token(v);
            if (!t) throw std::invalid_argument("config key 'variant_b': unknown variant '" + v + "'");
            sc.variant_b = *t;
        } else if (key == "cbr_mbps") sc.cbr_mbps = to_double(key, v);
        else if (key == "queue_kind") {
            auto q = queue_kind_from_token(v);
            if (!q) throw std::invalid_argument("config key 'queue_kind': unknown kind '" + v + "'");
            sc.queue_kind = *q;
        } else if (key == "seed") sc.seed = static_cast<std::uint64_t>(to_int(key, v));
        else if (key == "run_duration_s") sc.duration_s = to_double(key, v);
        else if (key == "cbr_start_s") sc.cbr_start_s = to_double(key, v);
        else if (key == "tcp_start_a_s" || key == "tcp_start_b_s") {
            if (sc.tcp_start_s.size() < 2)
                sc.tcp_start_s.resize(2, 0.0);
            sc.tcp_start_s[key == "tcp_start_a_s" ? 0 : 1] = to_double(key, v);
        } else {
            throw std::invalid_argument("unknown config key: '" + key + "'");
        }
    }
}

// Every effective parameter of a run, as key=value text. Anything the source
// experiments left unstated shows up here so results are auditable.
inline std::string render_metadata(const ResolvedScenario& p, const SimConfig& cfg) {
    using detail::fmt_g;
    std::ostringstream out;
    out << "scenario_id=" << p.id() << "\n";
    out << "experiment=" << p.experiment << "\n";
    out << "variant=" << to_token(p.variant_a) << "\n";
    if (p.variant_b)
        out << "variant_b=" << to_token(*p.variant_b) << "\n";
    out << "cbr_mbps=" << fmt_g(p.cbr_mbps) << "\n";
    out << "queue_kind=" << to_token(p.queue_kind) << "\n";
    out << "seed=" << p.seed << "\n";
    out << "duration_s=" << fmt_g(p.duration_s) << "\n";
    out << "cbr_start_s=" << fmt_g(p.cbr_start_s) << "\n";
    out << "tcp_start_a_s=" << fmt_g(p.tcp_start_a_s) << "\n";
    if (p.experiment == 2)
        out << "tcp_start_b_s=" << fmt_g(p.tcp_start_b_s) << "\n";
    out << "flow_id_tcp_a=" << kFlowTcpA << "\n";
    if (p.experiment == 2)
        out << "flow_id_tcp_b=" << kFlowTcpB << "\n";
    out << "flow_id_cbr=" << kFlowCbr << "\n";
    out << "link_bandwidth_bps=" << fmt_g(cfg.link_bandwidth_bps) << "\n";
    out << "prop_delay_s=" << fmt_g(cfg.prop_delay_s) << "\n";
    out << "bottleneck_queue_limit=" << cfg.bottleneck_queue_limit << "\n";
    out << "edge_queue_limit=" << cfg.edge_queue_limit << "\n";
    out << "red_min_th=" << fmt_g(cfg.red.min_th) << "\n";
    out << "red_max_th=" << fmt_g(cfg.red.max_th) << "\n";
    out << "red_max_p=" << fmt_g(cfg.red.max_p) << "\n";
    out << "red_w_q=" << fmt_g(cfg.red.w_q) << "\n";
    out << "segment_size=" << cfg.tcp.segment_size << "\n";
    out << "ack_size=" << cfg.tcp.ack_size << "\n";
    out << "rcv_wnd=" << cfg.tcp.rcv_wnd << "\n";
    out << "exp12_rcv_wnd=" << cfg.exp12_rcv_wnd << "\n";
    out << "cbr_jitter_frac=" << fmt_g(cfg.cbr_jitter_frac) << "\n";
    out << "initial_cwnd=" << fmt_g(cfg.tcp.initial_cwnd) << "\n";
    out << "initial_ssthresh=" << fmt_g(cfg.tcp.initial_ssthresh) << "\n";
    out << "rto_initial_s=" << fmt_g(cfg.tcp.rto_initial) << "\n";
    out << "rto_min_s=" << fmt_g(cfg.tcp.rto_min) << "\n";
    out << "rto_max_s=" << fmt_g(cfg.tcp.rto_max) << "\n";
    out << "vegas_alpha=" << fmt_g(cfg.tcp.vegas.alpha) << "\n";
    out << "vegas_beta=" << fmt_g(cfg.tcp.vegas.beta) << "\n";
    out << "vegas_gamma=" << fmt_g(cfg.tcp.vegas.gamma) << "\n";
    out << "cbr_packet_size=" << cfg.cbr_packet_size << "\n";
    out << "warmup_s=" << fmt_g(cfg.warmup_s) << "\n";
    out << "bucket_s=" << fmt_g(cfg.bucket_s) << "\n";
    return out.str();
}

}  // namespace tcpsim

#endif
