// Command line front end: run single scenarios, parameter sweeps, queue
// comparisons, and offline trace analysis.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcpsim/experiments.hpp"
#include "tcpsim/sim.hpp"

namespace {

using namespace tcpsim;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

TcpVariant require_variant(const std::string& tok) {
    auto v = variant_from_token(tok);
    if (!v)
        throw std::invalid_argument("unknown TCP variant: " + tok);
    return *v;
}

QueueKind require_queue(const std::string& tok) {
    auto q = queue_kind_from_token(tok);
    if (!q)
        throw std::invalid_argument("unknown queue kind: " + tok);
    return *q;
}

std::vector<TcpVariant> parse_variants(const std::string& s) {
    std::vector<TcpVariant> out;
    for (const auto& tok : split_list(s))
        out.push_back(require_variant(tok));
    if (out.empty())
        throw std::invalid_argument("empty variant list");
    return out;
}

std::vector<QueueKind> parse_queues(const std::string& s) {
    std::vector<QueueKind> out;
    for (const auto& tok : split_list(s))
        out.push_back(require_queue(tok));
    if (out.empty())
        throw std::invalid_argument("empty queue list");
    return out;
}

std::vector<std::pair<TcpVariant, TcpVariant>> parse_pairs(const std::string& s) {
    std::vector<std::pair<TcpVariant, TcpVariant>> out;
    for (const auto& tok : split_list(s)) {
        auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("pair must be <variant>:<variant>, got '" + tok + "'");
        out.emplace_back(require_variant(tok.substr(0, colon)),
                         require_variant(tok.substr(colon + 1)));
    }
    if (out.empty())
        throw std::invalid_argument("empty pair list");
    return out;
}

// Accepts "1:12:1" (start:stop:step, inclusive) or "1,2,5.5" (explicit list).
std::vector<double> parse_rates(const std::string& s) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        std::vector<std::string> f;
        std::string cur;
        for (char c : s) {
            if (c == ':') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() != 3)
            throw std::invalid_argument("rate range must be start:stop:step");
        double start = detail::to_double("rate start", f[0]);
        double stop = detail::to_double("rate stop", f[1]);
        double step = detail::to_double("rate step", f[2]);
        if (step <= 0 || stop < start)
            throw std::invalid_argument("rate range must have step > 0 and stop >= start");
        for (double r = start; r <= stop + 1e-9; r += step)
            out.push_back(r);
    } else {
        for (const auto& tok : split_list(s))
            out.push_back(detail::to_double("rate", tok));
    }
    if (out.empty())
        throw std::invalid_argument("empty rate list");
    for (double r : out)
        if (r < 0)
            throw std::invalid_argument("rates must be nonnegative");
    return out;
}

void apply_config_file(const std::string& path, SimConfig& cfg, Scenario& sc) {
    if (path.empty())
        return;
    apply_config(load_config_file(path), cfg, sc);
}

void print_flow_line(const FlowRow& r) {
    std::printf("  flow %d (%s): throughput %.4f Mbps", r.flow_id, r.variant.c_str(),
                r.stats.throughput_mbps);
    if (r.stats.avg_latency_s)
        std::printf(", latency %.4f s", *r.stats.avg_latency_s);
    else
        std::printf(", latency n/a");
    std::printf(", drops %lld (%.3f%%)\n", static_cast<long long>(r.stats.dropped_packets),
                100.0 * r.stats.drop_fraction);
}

int report_cell(const CellOutcome& cell, const OutputOptions& out) {
    if (!cell.ok) {
        std::fprintf(stderr, "run %s failed: %s\n", cell.params.id().c_str(),
                     cell.error.c_str());
        return cell.invariant_violation ? kExitInvariant : kExitError;
    }
    std::printf("scenario %s\n", cell.params.id().c_str());
    std::printf("  events %lld, final time %s s\n",
                static_cast<long long>(cell.result.engine_stats.events_processed),
                cell.result.engine_stats.final_time.to_string().c_str());
    for (const auto& r : cell.rows)
        print_flow_line(r);
    if (cell.fair) {
        if (cell.fair->ratio)
            std::printf("  fairness: ratio %.4f, jain %.4f\n", *cell.fair->ratio,
                        cell.fair->jain);
        else
            std::printf("  fairness: ratio n/a, jain %.4f\n", cell.fair->jain);
    }
    if (!out.out_dir.empty()) {
        std::string files = out.out_dir + "/metrics.csv, " + out.out_dir + "/meta";
        if (out.write_traces)
            files += ", " + out.out_dir + "/trace.tr";
        std::printf("wrote %s\n", files.c_str());
    }
    return kExitOk;
}

int cmd_run(int experiment, const std::string& variant, const std::string& variant_b,
            std::optional<double> cbr, const std::string& queue, std::uint64_t seed,
            std::optional<double> duration, std::optional<double> cbr_start,
            std::optional<double> tcp_start_a, std::optional<double> tcp_start_b,
            const std::string& config_path, const OutputOptions& out) {
    SimConfig cfg;
    Scenario sc;
    sc.experiment = experiment;
    apply_config_file(config_path, cfg, sc);
    if (!variant.empty())
        sc.variant_a = require_variant(variant);
    if (!variant_b.empty())
        sc.variant_b = require_variant(variant_b);
    if (cbr)
        sc.cbr_mbps = *cbr;
    if (!queue.empty())
        sc.queue_kind = require_queue(queue);
    sc.seed = seed;
    if (duration)
        sc.duration_s = *duration;
    if (cbr_start)
        sc.cbr_start_s = *cbr_start;
    if (tcp_start_a)
        sc.tcp_start_s = {*tcp_start_a};
    if (tcp_start_b) {
        if (sc.tcp_start_s.empty())
            sc.tcp_start_s = {0.0};
        sc.tcp_start_s.push_back(*tcp_start_b);
    }
    sc.validate();
    CellOutcome cell = run_single(sc, cfg, out);
    return report_cell(cell, out);
}

int cmd_sweep(const std::string& variants, const std::string& pairs, const std::string& rates,
              std::uint64_t seed, const std::string& config_path, const OutputOptions& out) {
    SimConfig cfg;
    Scenario ignored;
    apply_config_file(config_path, cfg, ignored);
    std::vector<double> rate_list = parse_rates(rates);
    SweepOutcome sweep;
    if (!pairs.empty())
        sweep = run_exp2_grid(parse_pairs(pairs), rate_list, seed, cfg, out);
    else
        sweep = run_exp1_sweep(parse_variants(variants), rate_list, seed, cfg, out);
    int failures = 0;
    bool invariant = false;
    for (const auto& cell : sweep.cells) {
        if (cell.ok) {
            std::printf("ok   %s\n", cell.params.id().c_str());
        } else {
            ++failures;
            invariant = invariant || cell.invariant_violation;
            std::fprintf(stderr, "FAIL %s: %s\n", cell.params.id().c_str(), cell.error.c_str());
        }
    }
    for (const auto& f : sweep.files_written)
        std::printf("wrote %s\n", f.c_str());
    if (failures)
        std::fprintf(stderr, "%d of %zu runs failed\n", failures, sweep.cells.size());
    return failures == 0 ? kExitOk : (invariant ? kExitInvariant : kExitError);
}

int cmd_exp3(const std::string& variants, const std::string& queues, std::optional<double> cbr,
             std::optional<double> cbr_start, std::uint64_t seed, const std::string& config_path,
             const OutputOptions& out) {
    SimConfig cfg;
    Scenario ignored;
    apply_config_file(config_path, cfg, ignored);
    if (cbr_start)
        cfg.exp3_cbr_start_s = *cbr_start;
    int failures = 0;
    bool invariant = false;
    for (TcpVariant v : parse_variants(variants)) {
        for (QueueKind q : parse_queues(queues)) {
            Exp3Outcome e3 = run_exp3(v, q, cbr, seed, cfg, out);
            if (e3.cell.ok) {
                std::printf("ok   %s\n", e3.cell.params.id().c_str());
                const FlowStats& tcp = *e3.cell.tcp_a;
                std::printf("  tcp throughput %.4f Mbps", tcp.throughput_mbps);
                if (tcp.avg_latency_s)
                    std::printf(", latency %.4f s", *tcp.avg_latency_s);
                std::printf(", drop fraction %.4f\n", tcp.drop_fraction);
                for (const auto& f : e3.files_written)
                    std::printf("wrote %s\n", f.c_str());
            } else {
                ++failures;
                invariant = invariant || e3.cell.invariant_violation;
                std::fprintf(stderr, "FAIL %s: %s\n", e3.cell.params.id().c_str(),
                             e3.cell.error.c_str());
            }
        }
    }
    return failures == 0 ? kExitOk : (invariant ? kExitInvariant : kExitError);
}

int cmd_analyze(const std::string& trace_path, const std::string& flows_arg, double t0,
                std::optional<double> t1, const std::string& csv_path) {
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "cannot open trace: %s\n", trace_path.c_str());
        return kExitError;
    }
    std::vector<TraceRecord> records = read_trace(in);
    if (records.empty()) {
        std::fprintf(stderr, "trace is empty: %s\n", trace_path.c_str());
        return kExitError;
    }
    std::vector<int> flows;
    if (!flows_arg.empty()) {
        for (const auto& tok : split_list(flows_arg))
            flows.push_back(static_cast<int>(detail::to_int("flow", tok)));
    } else {
        std::set<int> seen;
        for (const auto& r : records)
            if (r.pkt_type != PacketKind::Ack)
                seen.insert(r.fid);
        flows.assign(seen.begin(), seen.end());
    }
    double end = t1 ? *t1 : records.back().time.seconds() + 1e-9;
    Interval iv{t0, end};
    std::printf("trace %s: %zu records, interval [%g, %g)\n", trace_path.c_str(), records.size(),
                iv.t0, iv.t1);
    std::string csv = csv_header();
    for (int fid : flows) {
        try {
            FlowStats fs = flow_stats(records, fid, iv);
            FlowRow row{"analyze", "flow", 0.0, QueueKind::DropTail, fid, fs};
            print_flow_line(row);
            csv += csv_row(row);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "flow %d skipped: %s\n", fid, e.what());
        }
    }
    if (!csv_path.empty()) {
        detail::write_file(csv_path, csv);
        std::printf("wrote %s\n", csv_path.c_str());
    }
    return kExitOk;
}

int cmd_plotdata(const std::string& metrics_path, const std::string& out_dir) {
    std::ifstream in(metrics_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "cannot open metrics csv: %s\n", metrics_path.c_str());
        return kExitError;
    }
    std::vector<CsvRow> rows = parse_metrics_csv(in);
    std::vector<std::string> written = write_plotdata(rows, out_dir);
    if (written.empty()) {
        std::fprintf(stderr, "no sweep rows found in %s\n", metrics_path.c_str());
        return kExitError;
    }
    for (const auto& f : written)
        std::printf("wrote %s\n", f.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dumbbell network simulator for TCP congestion control experiments"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run one scenario and emit trace + metrics");
    int experiment = 1;
    std::string variant = "reno", variant_b, queue, config_path;
    double cbr_val = 0, duration_val = 0, cbr_start_val = 0, tcp_a_val = 0, tcp_b_val = 0;
    std::uint64_t seed = 4;
    OutputOptions run_out;
    run_out.out_dir = "out";
    bool no_trace = false;
    run->add_option("--experiment", experiment, "experiment number (1, 2, or 3)")
        ->check(CLI::Range(1, 3));
    run->add_option("--variant", variant, "TCP variant for flow A");
    run->add_option("--variant-b", variant_b, "TCP variant for flow B (experiment 2)");
    auto* opt_cbr = run->add_option("--cbr", cbr_val, "CBR rate in Mbps");
    run->add_option("--queue", queue, "bottleneck queue: droptail or red");
    run->add_option("--seed", seed, "RNG seed");
    auto* opt_dur = run->add_option("--duration", duration_val, "simulated seconds");
    auto* opt_cs = run->add_option("--cbr-start", cbr_start_val, "CBR start time (s)");
    auto* opt_ta = run->add_option("--tcp-start-a", tcp_a_val, "flow A start time (s)");
    auto* opt_tb = run->add_option("--tcp-start-b", tcp_b_val, "flow B start time (s)");
    run->add_option("--config", config_path, "key=value config file");
    run->add_option("--out-dir", run_out.out_dir, "output directory");
    run->add_flag("--no-trace", no_trace, "skip writing the packet trace");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "sweep CBR rates for one or more variants/pairs");
    std::string sw_variants = "tahoe,reno,newreno,vegas";
    std::string sw_pairs, sw_rates = "1:12:1", sw_config;
    std::uint64_t sw_seed = 4;
    OutputOptions sw_out;
    sw_out.out_dir = "out";
    bool sw_no_traces = false;
    sweep->add_option("--variants", sw_variants, "comma list of TCP variants (single-flow sweep)");
    sweep->add_option("--pairs", sw_pairs,
                      "comma list of a:b variant pairs (two-flow fairness sweep)");
    sweep->add_option("--cbr", sw_rates, "rates: start:stop:step or comma list (Mbps)");
    sweep->add_option("--seed", sw_seed, "RNG seed");
    sweep->add_option("--config", sw_config, "key=value config file");
    sweep->add_option("--out-dir", sw_out.out_dir, "output directory");
    sweep->add_flag("--no-traces", sw_no_traces, "skip writing per-run packet traces");

    // exp3
    auto* exp3 = app.add_subcommand("exp3", "queue discipline comparison with delayed CBR");
    std::string e3_variants = "reno,sack", e3_queues = "droptail,red", e3_config;
    double e3_cbr_val = 0, e3_cs_val = 0;
    std::uint64_t e3_seed = 4;
    OutputOptions e3_out;
    e3_out.out_dir = "out";
    bool e3_no_traces = false;
    exp3->add_option("--variants", e3_variants, "comma list of TCP variants");
    exp3->add_option("--queues", e3_queues, "comma list of queue kinds");
    auto* e3_cbr = exp3->add_option("--cbr", e3_cbr_val, "CBR rate in Mbps");
    auto* e3_cs = exp3->add_option("--cbr-start", e3_cs_val, "CBR start time (s)");
    exp3->add_option("--seed", e3_seed, "RNG seed");
    exp3->add_option("--config", e3_config, "key=value config file");
    exp3->add_option("--out-dir", e3_out.out_dir, "output directory");
    exp3->add_flag("--no-traces", e3_no_traces, "skip writing packet traces");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "compute flow metrics from a trace file");
    std::string an_trace, an_flows, an_csv;
    double an_t0 = 0, an_t1_val = 0;
    analyze->add_option("--trace", an_trace, "trace file to read")->required();
    analyze->add_option("--flows", an_flows, "comma list of flow ids (default: all data flows)");
    analyze->add_option("--t0", an_t0, "interval start (s)");
    auto* an_t1 = analyze->add_option("--t1", an_t1_val, "interval end (s, default: end of trace)");
    analyze->add_option("--csv", an_csv, "also write metrics CSV to this path");

    // plotdata
    auto* plot = app.add_subcommand("plotdata", "rebuild plot-ready .dat files from metrics CSV");
    std::string pd_metrics = "out/metrics.csv", pd_out = "out";
    plot->add_option("--metrics", pd_metrics, "metrics CSV produced by run/sweep");
    plot->add_option("--out-dir", pd_out, "output directory for .dat files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            run_out.write_traces = !no_trace;
            return cmd_run(experiment, variant, variant_b,
                           opt_cbr->count() ? std::optional<double>(cbr_val) : std::nullopt,
                           queue, seed,
                           opt_dur->count() ? std::optional<double>(duration_val) : std::nullopt,
                           opt_cs->count() ? std::optional<double>(cbr_start_val) : std::nullopt,
                           opt_ta->count() ? std::optional<double>(tcp_a_val) : std::nullopt,
                           opt_tb->count() ? std::optional<double>(tcp_b_val) : std::nullopt,
                           config_path, run_out);
        }
        if (sweep->parsed()) {
            sw_out.write_traces = !sw_no_traces;
            return cmd_sweep(sw_variants, sw_pairs, sw_rates, sw_seed, sw_config, sw_out);
        }
        if (exp3->parsed()) {
            e3_out.write_traces = !e3_no_traces;
            return cmd_exp3(e3_variants, e3_queues,
                            e3_cbr->count() ? std::optional<double>(e3_cbr_val) : std::nullopt,
                            e3_cs->count() ? std::optional<double>(e3_cs_val) : std::nullopt,
                            e3_seed, e3_config, e3_out);
        }
        if (analyze->parsed())
            return cmd_analyze(an_trace, an_flows, an_t0,
                               an_t1->count() ? std::optional<double>(an_t1_val) : std::nullopt,
                               an_csv);
        if (plot->parsed())
            return cmd_plotdata(pd_metrics, pd_out);
    } catch (const SimInvariantError& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return kExitInvariant;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitUsage;
}
