#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eposim/config.hpp"
#include "eposim/types.hpp"

namespace eposim {

/// Streaming mean/variance accumulator (Welford). Memory is O(1) per
/// group regardless of sample count; population standard deviation.
struct StreamingMoments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double max = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
        if (x > max || count == 1) max = x;
    }

    [[nodiscard]] double stddev() const {
        return count == 0 ? 0.0 : std::sqrt(m2 / static_cast<double>(count));
    }
};

/// Finalized per-run statistics.
struct MetricsSummary {
    // Delay moments in microseconds, grouped by service entitlement:
    // HP = packets admitted to the HP queue; BE = everything else
    // (native BE, demoted HP, promoted BE).
    std::array<StreamingMoments, 2> delay;               // [HP, BE]
    std::map<std::pair<OnuId, int>, StreamingMoments> delay_per_onu;

    std::int64_t offered_be_bytes = 0;   ///< generated BE + demoted, post-warmup
    std::int64_t delivered_be_bytes = 0; ///< of the offered population
    std::int64_t offered_hp_bytes = 0;   ///< generated HP minus demoted, post-warmup
    std::int64_t delivered_hp_bytes = 0;
    std::int64_t demoted_bytes = 0;      ///< lifetime
    std::int64_t promoted_bytes = 0;     ///< lifetime
    std::array<std::int64_t, 2> dropped_bytes = {0, 0};
    std::array<std::int64_t, 2> dropped_packets = {0, 0};
    double be_throughput_ratio = 1.0;
    double guard_overhead_fraction = 0.0;
    std::uint64_t frames_simulated = 0;
    std::uint64_t trace_hash = 0;

    // Config echo for CSV auditability.
    std::string scheduler;
    std::uint32_t n_onus = 0;
    std::int64_t guard_time_ns = 0;
    double offered_load = 0.0;
    std::uint64_t seed = 0;
    double hp_fraction = 0.0;
    std::int64_t frame_ns = 0;
    std::int64_t sim_ns = 0;
    std::uint32_t lookahead = 0;
};

/// @brief Per-run collector: streams delay samples into running moments
/// and keeps exact byte counters for throughput and conservation.
class MetricsCollector {
    SimTime warmup_end_;
    MetricsSummary sum_;

public:
    explicit MetricsCollector(SimTime warmup_end) : warmup_end_(warmup_end) {}

    /// Record a completed packet. Requires departure_time set (an unset
    /// departure here is an accounting bug and aborts).
    void record(const Packet& p) {
        if (!p.departure)
            throw SimulationError("metrics: packet without departure time");
        if (*p.departure < p.arrival)
            throw SimulationError("metrics: negative delay");
        const bool be_like = p.klass == ServiceClass::BE || p.demoted;
        if (p.arrival >= warmup_end_) {
            if (be_like)
                sum_.delivered_be_bytes += p.size_bytes;
            else
                sum_.delivered_hp_bytes += p.size_bytes;
            const double delay_us = (*p.departure - p.arrival).us();
            const int group = be_like ? 1 : 0;
            sum_.delay[static_cast<std::size_t>(group)].add(delay_us);
            sum_.delay_per_onu[{p.onu, group}].add(delay_us);
        }
    }

    /// Count a packet at generation time (post-admission classification:
    /// a demoted packet's bytes compete for BE bandwidth).
    void on_generated(ServiceClass klass, bool demoted, std::uint32_t size_bytes,
                      SimTime arrival) {
        if (arrival < warmup_end_) return;
        if (klass == ServiceClass::BE || demoted)
            sum_.offered_be_bytes += size_bytes;
        else
            sum_.offered_hp_bytes += size_bytes;
    }

    void on_dropped(ServiceClass klass, bool demoted, std::uint32_t size_bytes) {
        const int group = (klass == ServiceClass::BE || demoted) ? 1 : 0;
        sum_.dropped_bytes[static_cast<std::size_t>(group)] += size_bytes;
        sum_.dropped_packets[static_cast<std::size_t>(group)] += 1;
    }

    MetricsSummary finalize(std::uint64_t frames, double guard_fraction,
                            std::int64_t demoted, std::int64_t promoted,
                            std::uint64_t trace_hash) {
        sum_.frames_simulated = frames;
        sum_.guard_overhead_fraction = guard_fraction;
        sum_.demoted_bytes = demoted;
        sum_.promoted_bytes = promoted;
        sum_.trace_hash = trace_hash;
        sum_.be_throughput_ratio =
            sum_.offered_be_bytes == 0
                ? 1.0
                : static_cast<double>(sum_.delivered_be_bytes) /
                      static_cast<double>(sum_.offered_be_bytes);
        return sum_;
    }
};

namespace csv {

inline std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

inline const char* header() {
    return "scheduler,n_onus,guard_time_ns,offered_load,seed,class,count,"
           "mean_delay_us,pdv_us,be_throughput_ratio,max_delay_us,"
           "offered_bytes,delivered_bytes,dropped_bytes,dropped_packets,"
           "demoted_bytes,promoted_bytes,guard_overhead_fraction,frames,"
           "hp_fraction,frame_ns,sim_ns,lookahead";
}

/// One row per (run, class); delay fields are empty for empty groups, and
/// be_throughput_ratio appears only on BE rows.
inline std::string rows(const MetricsSummary& s) {
    std::string out;
    for (int cls = 0; cls < 2; ++cls) {
        const auto& m = s.delay[static_cast<std::size_t>(cls)];
        out += s.scheduler + ',' + std::to_string(s.n_onus) + ',' +
               std::to_string(s.guard_time_ns) + ',' + fmt(s.offered_load, 4) + ',' +
               std::to_string(s.seed) + ',' + (cls == 0 ? "hp" : "be") + ',' +
               std::to_string(m.count) + ',';
        if (m.count > 0)
            out += fmt(m.mean, 3) + ',' + fmt(m.stddev(), 3) + ',';
        else
            out += ",,";
        out += (cls == 1 ? fmt(s.be_throughput_ratio) : std::string()) + ',';
        out += (m.count > 0 ? fmt(m.max, 3) : std::string()) + ',';
        const std::int64_t offered = cls == 0 ? s.offered_hp_bytes : s.offered_be_bytes;
        const std::int64_t delivered =
            cls == 0 ? s.delivered_hp_bytes : s.delivered_be_bytes;
        out += std::to_string(offered) + ',' + std::to_string(delivered) + ',' +
               std::to_string(s.dropped_bytes[static_cast<std::size_t>(cls)]) + ',' +
               std::to_string(s.dropped_packets[static_cast<std::size_t>(cls)]) + ',' +
               std::to_string(s.demoted_bytes) + ',' + std::to_string(s.promoted_bytes) +
               ',' + fmt(s.guard_overhead_fraction) + ',' +
               std::to_string(s.frames_simulated) + ',' + fmt(s.hp_fraction, 4) + ',' +
               std::to_string(s.frame_ns) + ',' + std::to_string(s.sim_ns) + ',' +
               std::to_string(s.lookahead) + '\n';
    }
    return out;
}

} // namespace csv

/// Deterministic CSV for a list of summaries: header + two rows per run,
/// decimal point, no locale formatting. Rerunning with the same inputs
/// yields a byte-identical file.
inline std::string to_csv(const std::vector<MetricsSummary>& summaries) {
    if (summaries.empty()) throw ConfigError("to_csv: no summaries");
    std::string out = csv::header();
    out += '\n';
    for (const auto& s : summaries) out += csv::rows(s);
    return out;
}

} // namespace eposim
