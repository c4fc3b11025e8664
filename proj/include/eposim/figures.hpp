#pragma once

// Offline post-processing: turn results.csv into per-figure plot data
// files (whitespace-separated columns, '#' headers, plottable with any
// generic tool). Decoupled from the simulator on purpose.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eposim/config.hpp"

namespace eposim {

struct CsvRow {
    std::string scheduler;
    std::uint32_t n_onus = 0;
    std::int64_t guard_ns = 0;
    double load = 0.0;
    std::string klass;
    std::uint64_t count = 0;
    double mean_delay_us = 0.0;
    double pdv_us = 0.0;
    double be_ratio = 1.0;
    bool has_delay = false;
    bool has_ratio = false;
};

inline std::vector<CsvRow> parse_results_csv(const std::string& text) {
    std::vector<CsvRow> rows;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            continue; // header
        }
        std::vector<std::string> f;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const auto comma = line.find(',', pos);
            f.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                    : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (f.size() < 10) continue;
        CsvRow r;
        r.scheduler = f[0];
        r.n_onus = static_cast<std::uint32_t>(std::stoul(f[1]));
        r.guard_ns = std::stoll(f[2]);
        r.load = std::stod(f[3]);
        r.klass = f[5];
        r.count = std::stoull(f[6]);
        if (!f[7].empty()) {
            r.mean_delay_us = std::stod(f[7]);
            r.pdv_us = std::stod(f[8]);
            r.has_delay = true;
        }
        if (!f[9].empty()) {
            r.be_ratio = std::stod(f[9]);
            r.has_ratio = true;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace detail {

inline const CsvRow* find_row(const std::vector<CsvRow>& rows, const std::string& sched,
                              double load, const std::string& klass,
                              std::uint32_t n_onus) {
    for (const auto& r : rows)
        if (r.scheduler == sched && r.klass == klass && r.n_onus == n_onus &&
            std::abs(r.load - load) < 1e-9)
            return &r;
    return nullptr;
}

} // namespace detail

/// @brief Emit fig5 (delay vs load), fig6 (HP delay variation vs load) and
/// fig7 (BE throughput ratio vs load per (scheduler, n_onus)) data files
/// into `out_dir`. Fig5/fig6 use the smallest ONU count present; fig7 uses
/// every count. Throws ConfigError naming any missing sweep dimension.
inline void emit_figure_data(const std::vector<CsvRow>& rows, const std::string& out_dir) {
    if (rows.empty()) throw ConfigError("figure emission: results csv is empty");

    std::set<std::string> schedulers;
    std::set<double> loads;
    std::set<std::uint32_t> counts;
    for (const auto& r : rows) {
        schedulers.insert(r.scheduler);
        loads.insert(r.load);
        counts.insert(r.n_onus);
    }
    if (schedulers.size() < 2)
        throw ConfigError("figure emission: missing sweep dimension 'scheduler' "
                          "(need both hssr and ss)");
    if (loads.size() < 2)
        throw ConfigError("figure emission: missing sweep dimension 'offered_load'");

    const std::uint32_t base_n = *counts.begin();

    {
        std::ofstream out(out_dir + "/fig5_delay_vs_load.dat");
        if (!out) throw ConfigError("cannot write " + out_dir + "/fig5_delay_vs_load.dat");
        out << "# load hssr_hp_delay_us ss_hp_delay_us hssr_be_delay_us ss_be_delay_us"
            << " (n_onus=" << base_n << ")\n";
        for (double load : loads) {
            const auto* a = detail::find_row(rows, "hssr", load, "hp", base_n);
            const auto* b = detail::find_row(rows, "ss", load, "hp", base_n);
            const auto* c = detail::find_row(rows, "hssr", load, "be", base_n);
            const auto* d = detail::find_row(rows, "ss", load, "be", base_n);
            if (!a || !b || !c || !d) continue;
            char buf[160];
            std::snprintf(buf, sizeof buf, "%.4f %.3f %.3f %.3f %.3f\n", load,
                          a->mean_delay_us, b->mean_delay_us, c->mean_delay_us,
                          d->mean_delay_us);
            out << buf;
        }
    }
    {
        std::ofstream out(out_dir + "/fig6_pdv_vs_load.dat");
        if (!out) throw ConfigError("cannot write " + out_dir + "/fig6_pdv_vs_load.dat");
        out << "# load hssr_hp_pdv_us ss_hp_pdv_us (n_onus=" << base_n << ")\n";
        for (double load : loads) {
            const auto* a = detail::find_row(rows, "hssr", load, "hp", base_n);
            const auto* b = detail::find_row(rows, "ss", load, "hp", base_n);
            if (!a || !b) continue;
            char buf[96];
            std::snprintf(buf, sizeof buf, "%.4f %.3f %.3f\n", load, a->pdv_us, b->pdv_us);
            out << buf;
        }
    }
    {
        std::ofstream out(out_dir + "/fig7_be_penalty.dat");
        if (!out) throw ConfigError("cannot write " + out_dir + "/fig7_be_penalty.dat");
        out << "# load";
        for (const auto& sched : schedulers)
            for (std::uint32_t n : counts) out << ' ' << sched << "_n" << n << "_be_ratio";
        out << '\n';
        for (double load : loads) {
            std::string line;
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.4f", load);
            line += buf;
            bool complete = true;
            for (const auto& sched : schedulers)
                for (std::uint32_t n : counts) {
                    const auto* r = detail::find_row(rows, sched, load, "be", n);
                    if (!r || !r->has_ratio) {
                        complete = false;
                        continue;
                    }
                    std::snprintf(buf, sizeof buf, " %.6f", r->be_ratio);
                    line += buf;
                }
            if (complete) out << line << '\n';
        }
    }
}

inline void emit_figure_data_from_file(const std::string& csv_path,
                                       const std::string& out_dir) {
    std::ifstream in(csv_path);
    if (!in) throw ConfigError("cannot open " + csv_path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    emit_figure_data(parse_results_csv(text), out_dir);
}

} // namespace eposim
