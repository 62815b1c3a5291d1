#ifndef TCPSIM_EXPERIMENTS_HPP
#define TCPSIM_EXPERIMENTS_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tcpsim/config.hpp"
#include "tcpsim/metrics.hpp"
#include "tcpsim/scenario.hpp"

namespace tcpsim {

struct OutputOptions {
    std::string out_dir;  // empty = keep everything in memory, write nothing
    bool write_traces = true;
};

struct FlowRow {
    std::string scenario_id;
    std::string variant;  // variant token, or "cbr" for the CBR flow
    double cbr_mbps = 0;
    QueueKind queue_kind = QueueKind::DropTail;
    int flow_id = 0;
    FlowStats stats;
};

inline std::string csv_header() {
    return "scenario_id,variant,cbr_mbps,queue_kind,flow_id,throughput_mbps,latency_s,"
           "drop_fraction,drop_count\n";
}

inline std::string csv_row(const FlowRow& r) {
    using detail::fmt_g;
    std::ostringstream out;
    out << r.scenario_id << ',' << r.variant << ',' << fmt_g(r.cbr_mbps) << ','
        << to_token(r.queue_kind) << ',' << r.flow_id << ',' << fmt_g(r.stats.throughput_mbps)
        << ',' << (r.stats.avg_latency_s ? fmt_g(*r.stats.avg_latency_s) : "nan") << ','
        << fmt_g(r.stats.drop_fraction) << ',' << r.stats.dropped_packets << '\n';
    return out.str();
}

// One simulated scenario plus its measured statistics. A failed run carries
// the error text instead of killing a whole sweep.
struct CellOutcome {
    ResolvedScenario params;
    bool ok = false;
    bool invariant_violation = false;
    std::string error;
    std::optional<FlowStats> tcp_a;
    std::optional<FlowStats> tcp_b;
    std::optional<FlowStats> cbr;
    std::optional<Fairness> fair;
    std::vector<FlowRow> rows;
    RunResult result;  // records kept only when requested
};

namespace detail {

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << text;
}

inline Interval measurement_interval(const ResolvedScenario& p, const SimConfig& cfg) {
    double t0 = p.experiment == 3 ? p.cbr_start_s : cfg.warmup_s;
    if (t0 >= p.duration_s)
        t0 = 0;
    return Interval{t0, p.duration_s};
}

inline std::string variant_label(const ResolvedScenario& p, int flow_id) {
    if (flow_id == kFlowCbr)
        return "cbr";
    if (flow_id == kFlowTcpB && p.variant_b)
        return to_token(*p.variant_b);
    return to_token(p.variant_a);
}

}  // namespace detail

inline CellOutcome run_cell(const Scenario& sc, const SimConfig& cfg,
                            const std::string& trace_path, const std::string& meta_path,
                            bool keep_records) {
    CellOutcome cell;
    cell.params = resolve(sc, cfg);
    if (!meta_path.empty())
        detail::write_file(meta_path, render_metadata(cell.params, cfg));
    try {
        Simulation sim(sc, cfg);
        std::ofstream trace_out;
        if (!trace_path.empty()) {
            trace_out.open(trace_path, std::ios::binary);
            if (!trace_out)
                throw std::runtime_error("cannot open for writing: " + trace_path);
            sim.attach_trace_stream(trace_out);
        }
        cell.result = sim.run();

        Interval iv = detail::measurement_interval(cell.params, cfg);
        auto add_flow = [&](int fid, std::optional<FlowStats>& slot) {
            FlowStats fs = flow_stats(cell.result.records, fid, iv);
            slot = fs;
            cell.rows.push_back(FlowRow{cell.params.id(), detail::variant_label(cell.params, fid),
                                        cell.params.cbr_mbps, cell.params.queue_kind, fid, fs});
        };
        add_flow(kFlowTcpA, cell.tcp_a);
        if (cell.params.experiment == 2)
            add_flow(kFlowTcpB, cell.tcp_b);
        if (cell.params.cbr_mbps > 0)
            add_flow(kFlowCbr, cell.cbr);
        if (cell.tcp_a && cell.tcp_b &&
            (cell.tcp_a->throughput_mbps > 0 || cell.tcp_b->throughput_mbps > 0))
            cell.fair = fairness(cell.tcp_a->throughput_mbps, cell.tcp_b->throughput_mbps);
        cell.ok = true;
    } catch (const SimInvariantError& e) {
        cell.ok = false;
        cell.invariant_violation = true;
        cell.error = e.what();
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    if (!keep_records)
        cell.result.records.clear();
    return cell;
}

// `run` subcommand workhorse: one scenario, fixed output names.
inline CellOutcome run_single(const Scenario& sc, const SimConfig& cfg,
                              const OutputOptions& out, bool keep_records = false) {
    std::string trace_path, meta_path;
    if (!out.out_dir.empty()) {
        std::filesystem::create_directories(out.out_dir);
        if (out.write_traces)
            trace_path = out.out_dir + "/trace.tr";
        meta_path = out.out_dir + "/meta";
    }
    CellOutcome cell = run_cell(sc, cfg, trace_path, meta_path, keep_records);
    if (!out.out_dir.empty() && cell.ok) {
        std::string csv = csv_header();
        for (const auto& r : cell.rows)
            csv += csv_row(r);
        detail::write_file(out.out_dir + "/metrics.csv", csv);
    }
    return cell;
}

struct SweepOutcome {
    std::vector<CellOutcome> cells;
    std::vector<std::string> files_written;
};

namespace detail {

inline std::string dat_value(const std::optional<double>& v) {
    return v ? fmt_g(*v) : "nan";
}

// rows: one per rate; columns: one per variant label.
inline std::string pivot_dat(const std::string& title, const std::vector<double>& rates,
                             const std::vector<std::string>& labels,
                             const std::map<std::pair<std::string, double>,
                                            std::optional<double>>& values) {
    std::ostringstream out;
    out << "# " << title << "\n# cbr_mbps";
    for (const auto& l : labels)
        out << ' ' << l;
    out << '\n';
    for (double r : rates) {
        out << fmt_g(r);
        for (const auto& l : labels) {
            auto it = values.find({l, r});
            out << ' ' << (it != values.end() ? dat_value(it->second) : "nan");
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace detail

inline SweepOutcome run_exp1_sweep(const std::vector<TcpVariant>& variants,
                                   const std::vector<double>& rates, std::uint64_t seed,
                                   const SimConfig& cfg, const OutputOptions& out) {
    SweepOutcome sweep;
    bool writing = !out.out_dir.empty();
    if (writing)
        std::filesystem::create_directories(out.out_dir);
    std::string csv = csv_header();
    std::map<std::pair<std::string, double>, std::optional<double>> tp, dr, lat;
    std::vector<std::string> labels;
    for (TcpVariant v : variants)
        labels.push_back(to_token(v));

    for (TcpVariant v : variants) {
        for (double rate : rates) {
            Scenario sc;
            sc.experiment = 1;
            sc.variant_a = v;
            sc.cbr_mbps = rate;
            sc.seed = seed;
            std::string id = resolve(sc, cfg).id();
            std::string trace_path =
                writing && out.write_traces ? out.out_dir + "/trace-" + id + ".tr" : "";
            std::string meta_path = writing ? out.out_dir + "/meta-" + id : "";
            CellOutcome cell = run_cell(sc, cfg, trace_path, meta_path, false);
            for (const auto& r : cell.rows)
                csv += csv_row(r);
            std::string label = to_token(v);
            if (cell.ok && cell.tcp_a) {
                tp[{label, rate}] = cell.tcp_a->throughput_mbps;
                dr[{label, rate}] = cell.tcp_a->drop_fraction;
                lat[{label, rate}] = cell.tcp_a->avg_latency_s;
            } else {
                tp[{label, rate}] = std::nullopt;
                dr[{label, rate}] = std::nullopt;
                lat[{label, rate}] = std::nullopt;
            }
            sweep.cells.push_back(std::move(cell));
        }
    }
    if (writing) {
        auto put = [&](const std::string& name, const std::string& text) {
            std::string path = out.out_dir + "/" + name;
            detail::write_file(path, text);
            sweep.files_written.push_back(path);
        };
        put("metrics.csv", csv);
        put("throughput.dat",
            detail::pivot_dat("TCP throughput (Mbps) vs CBR rate", rates, labels, tp));
        put("droprate.dat",
            detail::pivot_dat("TCP drop fraction vs CBR rate", rates, labels, dr));
        put("latency.dat",
            detail::pivot_dat("TCP average latency (s) vs CBR rate", rates, labels, lat));
    }
    return sweep;
}

inline SweepOutcome run_exp2_grid(const std::vector<std::pair<TcpVariant, TcpVariant>>& pairs,
                                  const std::vector<double>& rates, std::uint64_t seed,
                                  const SimConfig& cfg, const OutputOptions& out) {
    SweepOutcome sweep;
    bool writing = !out.out_dir.empty();
    if (writing)
        std::filesystem::create_directories(out.out_dir);
    std::string csv = csv_header();
    std::string fair_csv =
        "scenario_id,variant_a,variant_b,cbr_mbps,throughput_a_mbps,throughput_b_mbps,ratio,"
        "jain\n";

    for (const auto& [va, vb] : pairs) {
        std::ostringstream dat;
        dat << "# TCP pair " << to_token(va) << " vs " << to_token(vb)
            << ": per-flow throughput (Mbps) and Jain index vs CBR rate\n";
        dat << "# cbr_mbps " << to_token(va) << "_a " << to_token(vb) << "_b jain\n";
        for (double rate : rates) {
            Scenario sc;
            sc.experiment = 2;
            sc.variant_a = va;
            sc.variant_b = vb;
            sc.cbr_mbps = rate;
            sc.seed = seed;
            std::string id = resolve(sc, cfg).id();
            std::string trace_path =
                writing && out.write_traces ? out.out_dir + "/trace-" + id + ".tr" : "";
            std::string meta_path = writing ? out.out_dir + "/meta-" + id : "";
            CellOutcome cell = run_cell(sc, cfg, trace_path, meta_path, false);
            for (const auto& r : cell.rows)
                csv += csv_row(r);
            using detail::fmt_g;
            if (cell.ok && cell.tcp_a && cell.tcp_b) {
                fair_csv += id;
                fair_csv += ',';
                fair_csv += to_token(va);
                fair_csv += ',';
                fair_csv += to_token(vb);
                fair_csv += ',' + fmt_g(rate) + ',' + fmt_g(cell.tcp_a->throughput_mbps) + ',' +
                            fmt_g(cell.tcp_b->throughput_mbps) + ',';
                if (cell.fair) {
                    fair_csv += cell.fair->ratio ? fmt_g(*cell.fair->ratio) : "nan";
                    fair_csv += ',' + fmt_g(cell.fair->jain);
                } else {
                    fair_csv += "nan,nan";
                }
                fair_csv += '\n';
                dat << fmt_g(rate) << ' ' << fmt_g(cell.tcp_a->throughput_mbps) << ' '
                    << fmt_g(cell.tcp_b->throughput_mbps) << ' '
                    << (cell.fair ? fmt_g(cell.fair->jain) : "nan") << '\n';
            } else {
                dat << fmt_g(rate) << " nan nan nan\n";
            }
            sweep.cells.push_back(std::move(cell));
        }
        if (writing) {
            std::string path = out.out_dir + "/exp2-" + to_token(va) + "-" + to_token(vb) + ".dat";
            detail::write_file(path, dat.str());
            sweep.files_written.push_back(path);
        }
    }
    if (writing) {
        detail::write_file(out.out_dir + "/metrics.csv", csv);
        sweep.files_written.push_back(out.out_dir + "/metrics.csv");
        detail::write_file(out.out_dir + "/fairness.csv", fair_csv);
        sweep.files_written.push_back(out.out_dir + "/fairness.csv");
    }
    return sweep;
}

struct Exp3Outcome {
    CellOutcome cell;
    std::vector<TimeSeriesPoint> tcp_throughput;
    std::vector<TimeSeriesPoint> cbr_throughput;
    std::vector<TimeSeriesPoint> tcp_latency;
    std::vector<std::string> files_written;
};

inline Exp3Outcome run_exp3(TcpVariant variant, QueueKind queue, std::optional<double> cbr_mbps,
                            std::uint64_t seed, const SimConfig& cfg, const OutputOptions& out,
                            bool keep_records = false) {
    Exp3Outcome e3;
    Scenario sc;
    sc.experiment = 3;
    sc.variant_a = variant;
    sc.queue_kind = queue;
    sc.cbr_mbps = cbr_mbps;
    sc.seed = seed;
    bool writing = !out.out_dir.empty();
    if (writing)
        std::filesystem::create_directories(out.out_dir);
    std::string id = resolve(sc, cfg).id();
    std::string trace_path = writing && out.write_traces ? out.out_dir + "/trace-" + id + ".tr" : "";
    std::string meta_path = writing ? out.out_dir + "/meta-" + id : "";
    e3.cell = run_cell(sc, cfg, trace_path, meta_path, true);
    if (e3.cell.ok) {
        const auto& recs = e3.cell.result.records;
        e3.tcp_throughput = time_series(recs, kFlowTcpA, MetricKind::Throughput, cfg.bucket_s);
        e3.cbr_throughput = time_series(recs, kFlowCbr, MetricKind::Throughput, cfg.bucket_s);
        e3.tcp_latency = time_series(recs, kFlowTcpA, MetricKind::Latency, cfg.bucket_s);
        if (writing) {
            using detail::fmt_g;
            std::ostringstream dat;
            dat << "# " << to_token(variant) << " over " << to_token(queue)
                << ": per-bucket TCP/CBR throughput (Mbps) and TCP latency (s)\n";
            dat << "# time_s tcp_mbps cbr_mbps tcp_latency_s\n";
            for (std::size_t i = 0; i < e3.tcp_throughput.size(); ++i) {
                dat << fmt_g(e3.tcp_throughput[i].bucket_start) << ' '
                    << detail::dat_value(e3.tcp_throughput[i].value) << ' '
                    << (i < e3.cbr_throughput.size() ? detail::dat_value(e3.cbr_throughput[i].value)
                                                     : "0")
                    << ' '
                    << (i < e3.tcp_latency.size() ? detail::dat_value(e3.tcp_latency[i].value)
                                                  : "nan")
                    << '\n';
            }
            std::string path =
                out.out_dir + "/exp3-" + to_token(variant) + "-" + to_token(queue) + ".dat";
            detail::write_file(path, dat.str());
            e3.files_written.push_back(path);
            std::string csv = csv_header();
            for (const auto& r : e3.cell.rows)
                csv += csv_row(r);
            detail::write_file(out.out_dir + "/metrics-" + id + ".csv", csv);
            e3.files_written.push_back(out.out_dir + "/metrics-" + id + ".csv");
        }
    }
    if (!keep_records)
        e3.cell.result.records.clear();
    return e3;
}

// ---- plotdata: rebuild .dat files from a metrics CSV ----

struct CsvRow {
    std::string scenario_id;
    std::string variant;
    double cbr_mbps = 0;
    std::string queue_kind;
    int flow_id = 0;
    double throughput_mbps = 0;
    std::optional<double> latency_s;
    double drop_fraction = 0;
    std::int64_t drop_count = 0;
};

inline std::vector<CsvRow> parse_metrics_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind("scenario_id,", 0) == 0)
            continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() != 9)
            throw std::invalid_argument("metrics csv line " + std::to_string(line_no) +
                                        ": expected 9 columns");
        CsvRow r;
        r.scenario_id = f[0];
        r.variant = f[1];
        r.cbr_mbps = detail::to_double("cbr_mbps", f[2]);
        r.queue_kind = f[3];
        r.flow_id = static_cast<int>(detail::to_int("flow_id", f[4]));
        r.throughput_mbps = detail::to_double("throughput_mbps", f[5]);
        if (f[6] != "nan")
            r.latency_s = detail::to_double("latency_s", f[6]);
        r.drop_fraction = detail::to_double("drop_fraction", f[7]);
        r.drop_count = detail::to_int("drop_count", f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<std::string> write_plotdata(const std::vector<CsvRow>& rows,
                                               const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;

    // Experiment 1: pivot the TCP flow by (variant, rate).
    std::vector<std::string> labels;
    std::vector<double> rates;
    std::map<std::pair<std::string, double>, std::optional<double>> tp, dr, lat;
    for (const auto& r : rows) {
        if (r.scenario_id.rfind("exp1-", 0) != 0 || r.flow_id != kFlowTcpA)
            continue;
        if (std::find(labels.begin(), labels.end(), r.variant) == labels.end())
            labels.push_back(r.variant);
        if (std::find(rates.begin(), rates.end(), r.cbr_mbps) == rates.end())
            rates.push_back(r.cbr_mbps);
        tp[{r.variant, r.cbr_mbps}] = r.throughput_mbps;
        dr[{r.variant, r.cbr_mbps}] = r.drop_fraction;
        lat[{r.variant, r.cbr_mbps}] = r.latency_s;
    }
    if (!labels.empty()) {
        std::sort(rates.begin(), rates.end());
        auto put = [&](const std::string& name, const std::string& text) {
            std::string path = out_dir + "/" + name;
            detail::write_file(path, text);
            written.push_back(path);
        };
        put("throughput.dat",
            detail::pivot_dat("TCP throughput (Mbps) vs CBR rate", rates, labels, tp));
        put("droprate.dat", detail::pivot_dat("TCP drop fraction vs CBR rate", rates, labels, dr));
        put("latency.dat",
            detail::pivot_dat("TCP average latency (s) vs CBR rate", rates, labels, lat));
    }

    // Experiment 2: per-pair throughput columns plus recomputed Jain index.
    std::map<std::string, std::map<double, std::pair<std::optional<double>, std::optional<double>>>>
        pairs;
    std::map<std::string, std::pair<std::string, std::string>> pair_names;
    for (const auto& r : rows) {
        if (r.scenario_id.rfind("exp2-", 0) != 0)
            continue;
        if (r.flow_id != kFlowTcpA && r.flow_id != kFlowTcpB)
            continue;
        // scenario id: exp2-<a>-<b>-cbr<r>-<queue>-s<seed>
        std::string rest = r.scenario_id.substr(5);
        std::size_t cbr_pos = rest.find("-cbr");
        if (cbr_pos == std::string::npos)
            continue;
        std::string pair_key = rest.substr(0, cbr_pos);
        auto& slot = pairs[pair_key][r.cbr_mbps];
        if (r.flow_id == kFlowTcpA) {
            slot.first = r.throughput_mbps;
            pair_names[pair_key].first = r.variant;
        } else {
            slot.second = r.throughput_mbps;
            pair_names[pair_key].second = r.variant;
        }
    }
    for (const auto& [key, by_rate] : pairs) {
        using detail::fmt_g;
        std::ostringstream dat;
        const auto& [na, nb] = pair_names[key];
        dat << "# TCP pair " << na << " vs " << nb
            << ": per-flow throughput (Mbps) and Jain index vs CBR rate\n";
        dat << "# cbr_mbps " << na << "_a " << nb << "_b jain\n";
        for (const auto& [rate, ab] : by_rate) {
            dat << fmt_g(rate) << ' ' << detail::dat_value(ab.first) << ' '
                << detail::dat_value(ab.second);
            if (ab.first && ab.second && (*ab.first > 0 || *ab.second > 0))
                dat << ' ' << fmt_g(fairness(*ab.first, *ab.second).jain);
            else
                dat << " nan";
            dat << '\n';
        }
        std::string path = out_dir + "/exp2-" + key + ".dat";
        detail::write_file(path, dat.str());
        written.push_back(path);
    }
    return written;
}

}  // namespace tcpsim

#endif
