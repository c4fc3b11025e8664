#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eposim/time.hpp"
#include "eposim/types.hpp"

namespace eposim {

/// Discrete packet-size distribution: (size_bytes, weight) entries,
/// weights strictly positive and summing to 1.
struct SizeDistribution {
    struct Entry {
        std::uint32_t size_bytes;
        double weight;
    };
    std::vector<Entry> entries;

    static SizeDistribution default_trimodal() {
        return {{{40, 0.4}, {552, 0.3}, {1500, 0.3}}};
    }

    [[nodiscard]] double mean_bytes() const {
        double m = 0.0;
        for (const auto& e : entries) m += e.weight * e.size_bytes;
        return m;
    }
};

/// A scripted ONU join: at `time` a new ONU at `distance_km` asks to be
/// ranged into the network.
struct JoinScript {
    SimTime time;
    double distance_km = 10.0;
};

enum class SchedulerKind : std::uint8_t { Hssr, Ss };

constexpr std::string_view to_string(SchedulerKind k) {
    return k == SchedulerKind::Hssr ? "hssr" : "ss";
}

struct NetworkConfig {
    std::uint32_t n_onus = 16;
    std::int64_t line_rate_bps = 1000000000;
    SimTime frame_duration = SimTime::from_ms(1);
    SimTime guard_time = SimTime::from_ns(100);
    std::vector<double> onu_distances_km; ///< empty => spread evenly over [2, 20]
    double propagation_us_per_km = 5.0;
    std::optional<std::int64_t> subscribed_hp_bps_per_onu; ///< default 0.3*line/n
    SimTime ranging_interval = SimTime::from_s(10);
    std::uint32_t report_overhead_bytes = 64;
    std::uint32_t lookahead_depth = 8;
    std::int64_t queue_capacity_bytes = 10000000;
    double min_ranging_distance_km = 2.0;  ///< assumed reach, lower bound
    double max_ranging_distance_km = 20.0; ///< assumed reach, upper bound
    double ranging_error_fraction = 0.25;  ///< error bound = fraction * guard_time
    std::uint32_t ranging_reply_bytes = 64;
    SimTime reply_turnaround = SimTime::zero();
};

struct ScenarioConfig {
    NetworkConfig network;
    SchedulerKind scheduler = SchedulerKind::Hssr;
    double offered_load = 0.5;
    double hp_fraction = 0.3;
    SimTime sim_duration = SimTime::from_s(5);
    double warmup_fraction = 0.1;
    std::uint64_t seed = 1;
    bool allow_hp_oversubscription = false;
    SizeDistribution size_distribution = SizeDistribution::default_trimodal();
    std::optional<SizeDistribution> hp_size_distribution; ///< overrides size_distribution for HP
    std::optional<SizeDistribution> be_size_distribution; ///< overrides size_distribution for BE
    std::vector<JoinScript> joins;
};

/// One named validation failure. `key` identifies the offending parameter
/// group; `message` explains the violation with the numbers involved.
struct ValidationIssue {
    std::string key;
    std::string message;
};

namespace detail {

inline void add(std::vector<ValidationIssue>& v, std::string key, std::string msg) {
    v.push_back({std::move(key), std::move(msg)});
}

inline bool check_distribution(const SizeDistribution& d, const std::string& key,
                               std::vector<ValidationIssue>& issues) {
    if (d.entries.empty()) {
        add(issues, key, "size distribution must have at least one entry");
        return false;
    }
    double sum = 0.0;
    bool ok = true;
    for (const auto& e : d.entries) {
        if (e.size_bytes < 40 || e.size_bytes > 1500) {
            add(issues, key, "packet size " + std::to_string(e.size_bytes) +
                                 " outside [40, 1500] bytes");
            ok = false;
        }
        if (e.weight <= 0.0) {
            add(issues, key, "weights must be strictly positive");
            ok = false;
        }
        sum += e.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        add(issues, key, "weights sum to " + std::to_string(sum) + ", expected 1");
        ok = false;
    }
    return ok;
}

} // namespace detail

/// @brief A scenario that passed validation, plus the derived quantities
/// every module needs. Immutable after construction; safe to share
/// read-only across concurrently running simulation instances.
class ValidatedScenario {
public:
    ScenarioConfig cfg;

    // Derived, all exact integer arithmetic.
    std::int64_t subscribed_hp_bps = 0;      ///< per ONU
    std::int64_t hp_budget_bits = 0;         ///< meter budget per window, in bits
    std::int64_t hp_slot_payload_bytes = 0;  ///< floor(budget_bits / 8)
    std::int64_t frame_payload_bytes = 0;
    SimTime warmup_end;
    std::uint64_t n_frames = 0;
    std::vector<double> distances_km;        ///< resolved, length n_onus
    SizeDistribution hp_sizes;
    SizeDistribution be_sizes;
    double hp_rate_bps = 0.0;                ///< offered, per ONU
    double be_rate_bps = 0.0;                ///< offered, per ONU
    SimTime ranging_error_bound;

    [[nodiscard]] SimTime prop_delay(double km) const {
        return SimTime::from_ns(static_cast<std::int64_t>(
            km * cfg.network.propagation_us_per_km * 1000.0 + 0.5));
    }

    /// Steady-part layout length for `n` ONUs (HSSR): n x (guard + slot).
    [[nodiscard]] SimTime steady_part_end(std::uint32_t n) const {
        const SimTime slot = bytes_to_duration(
            hp_slot_payload_bytes + cfg.network.report_overhead_bytes,
            cfg.network.line_rate_bps);
        return (cfg.network.guard_time + slot) * n;
    }

    friend std::optional<ValidatedScenario> make_validated(const ScenarioConfig&,
                                                           std::vector<ValidationIssue>&);

private:
    ValidatedScenario() = default;
};

/// Internal: build the derived view, appending issues on failure.
inline std::optional<ValidatedScenario> make_validated(const ScenarioConfig& in,
                                                       std::vector<ValidationIssue>& issues) {
    const NetworkConfig& net = in.network;
    auto& add = detail::add;

    if (net.n_onus < 1 || net.n_onus > 512)
        add(issues, "n_onus", "n_onus must be in [1, 512], got " + std::to_string(net.n_onus));
    if (net.line_rate_bps <= 0)
        add(issues, "line_rate_bps", "line rate must be positive");
    if (net.frame_duration <= SimTime::zero())
        add(issues, "frame_duration", "frame duration must be positive");
    if (net.guard_time < SimTime::from_ns(20))
        add(issues, "guard_time", "guard_time below 20ns (got " +
                                      format_time(net.guard_time) + ")");
    if (net.guard_time > SimTime::from_us(1))
        add(issues, "guard_time", "guard_time above 1us (got " +
                                      format_time(net.guard_time) + ")");
    if (in.offered_load <= 0.0 || in.offered_load > 1.0)
        add(issues, "offered_load", "offered_load must be in (0, 1], got " +
                                        std::to_string(in.offered_load));
    if (in.hp_fraction < 0.0 || in.hp_fraction >= 1.0)
        add(issues, "hp_fraction", "hp_fraction must be in [0, 1)");
    if (in.warmup_fraction < 0.0 || in.warmup_fraction >= 1.0)
        add(issues, "warmup_fraction", "warmup_fraction must be in [0, 1)");
    if (in.sim_duration <= SimTime::zero())
        add(issues, "sim_duration", "sim_duration must be positive");
    if (net.lookahead_depth < 1)
        add(issues, "lookahead_depth", "lookahead_depth must be >= 1");
    if (net.queue_capacity_bytes < 1500)
        add(issues, "queue_capacity_bytes", "queue capacity must hold at least one MTU packet");
    if (net.propagation_us_per_km <= 0.0)
        add(issues, "propagation_us_per_km", "propagation speed must be positive");
    if (net.min_ranging_distance_km <= 0.0 ||
        net.max_ranging_distance_km < net.min_ranging_distance_km)
        add(issues, "ranging_distance", "ranging distance bounds are inverted");
    if (net.ranging_error_fraction < 0.0 || net.ranging_error_fraction >= 0.5)
        add(issues, "ranging_error_fraction", "ranging error fraction must be in [0, 0.5)");

    // Distances: default to an even spread over [2, 20] km.
    std::vector<double> distances = net.onu_distances_km;
    if (distances.empty() && net.n_onus >= 1) {
        distances.resize(net.n_onus);
        for (std::uint32_t i = 0; i < net.n_onus; ++i)
            distances[i] =
                net.n_onus == 1 ? 10.0 : 2.0 + 18.0 * double(i) / double(net.n_onus - 1);
    }
    if (distances.size() != net.n_onus)
        add(issues, "onu_distances_km",
            "expected " + std::to_string(net.n_onus) + " distances, got " +
                std::to_string(distances.size()));
    for (double d : distances)
        if (d < 2.0 || d > 20.0)
            add(issues, "onu_distances_km",
                "distance " + std::to_string(d) + " km outside [2, 20]");

    // Frame-alignment assumption: frame >= 2 * (max one-way propagation) * 2.
    if (net.frame_duration > SimTime::zero() && !distances.empty()) {
        double max_km = *std::max_element(distances.begin(), distances.end());
        max_km = std::max(max_km, net.max_ranging_distance_km);
        const double max_prop_ns = max_km * net.propagation_us_per_km * 1000.0;
        if (static_cast<double>(net.frame_duration.ns()) < 4.0 * max_prop_ns)
            add(issues, "frame_duration",
                "frame/propagation alignment violated: frame " +
                    format_time(net.frame_duration) + " < 4 x max one-way propagation (" +
                    std::to_string(static_cast<std::int64_t>(max_prop_ns)) + "ns)");
    }

    detail::check_distribution(in.size_distribution, "size_distribution", issues);
    if (in.hp_size_distribution)
        detail::check_distribution(*in.hp_size_distribution, "hp_size_distribution", issues);
    if (in.be_size_distribution)
        detail::check_distribution(*in.be_size_distribution, "be_size_distribution", issues);

    if (!issues.empty()) return std::nullopt;

    ValidatedScenario v;
    v.cfg = in;
    v.cfg.network.onu_distances_km = distances;
    v.distances_km = distances;

    v.subscribed_hp_bps = net.subscribed_hp_bps_per_onu
                              ? *net.subscribed_hp_bps_per_onu
                              : static_cast<std::int64_t>(0.3 * double(net.line_rate_bps) /
                                                          double(net.n_onus));
    if (v.subscribed_hp_bps < 0) {
        add(issues, "subscribed_hp_bps_per_onu", "subscription must be non-negative");
        return std::nullopt;
    }
    v.hp_budget_bits = static_cast<std::int64_t>(
        int128(v.subscribed_hp_bps) * net.frame_duration.ns() / 1000000000);
    v.hp_slot_payload_bytes = v.hp_budget_bits / 8;
    v.frame_payload_bytes = duration_to_bytes(net.frame_duration, net.line_rate_bps);

    // Steady part + guards must leave a nonempty dynamic part.
    const std::int64_t total_guard_bytes =
        duration_to_bytes(net.guard_time * (net.n_onus + 1), net.line_rate_bps);
    const std::int64_t steady_bytes =
        std::int64_t(net.n_onus) * (v.hp_slot_payload_bytes + net.report_overhead_bytes);
    if (steady_bytes + total_guard_bytes >= v.frame_payload_bytes)
        add(issues, "subscribed_hp_bps_per_onu",
            "steady part + guards (" + std::to_string(steady_bytes + total_guard_bytes) +
                " B) leave no dynamic part in a " + std::to_string(v.frame_payload_bytes) +
                " B frame");

    // Offered HP must not exceed subscription unless explicitly allowed.
    const double offered_hp = in.offered_load * in.hp_fraction * double(net.line_rate_bps);
    if (!in.allow_hp_oversubscription &&
        offered_hp > double(v.subscribed_hp_bps) * double(net.n_onus) * (1.0 + 1e-9))
        add(issues, "offered_load",
            "offered HP " + std::to_string(offered_hp) + " bps exceeds total subscription " +
                std::to_string(v.subscribed_hp_bps * net.n_onus) +
                " bps (set allow_hp_oversubscription to permit)");

    // Do not derive ranging geometry from a layout that is already broken.
    if (!issues.empty()) return std::nullopt;

    // Ranging feasibility: the reply window must fit between the steady
    // part and the frame end.
    if (!in.joins.empty()) {
        if (in.scheduler != SchedulerKind::Hssr)
            add(issues, "joins", "ranging (joins) requires the hssr scheduler");
        const SimTime steady_end = v.steady_part_end(net.n_onus);
        const SimTime rtt_spread = v.prop_delay(net.max_ranging_distance_km) * 2 -
                                   v.prop_delay(net.min_ranging_distance_km) * 2;
        const SimTime reply_dur =
            bytes_to_duration(net.ranging_reply_bytes, net.line_rate_bps);
        const SimTime window_len = rtt_spread + reply_dur;
        if (steady_end + net.guard_time + window_len > net.frame_duration)
            add(issues, "joins", "frame too small for non-intrusive ranging");
        // Joins must be physically plausible; whether they fall inside the
        // *assumed* ranging reach is the ranging controller's business (an
        // out-of-reach reply misses the window and is retried).
        for (const auto& j : in.joins) {
            if (j.distance_km < 2.0 || j.distance_km > 20.0)
                add(issues, "joins", "join distance " + std::to_string(j.distance_km) +
                                         " km outside [2, 20]");
            if (j.time >= in.sim_duration)
                add(issues, "joins", "join time past end of simulation");
        }
        // The joined population must still fit a frame.
        const std::int64_t n1 = net.n_onus + std::int64_t(in.joins.size());
        const std::int64_t steady1 =
            n1 * (v.hp_slot_payload_bytes + net.report_overhead_bytes);
        const std::int64_t guards1 =
            duration_to_bytes(net.guard_time * (n1 + 1), net.line_rate_bps);
        if (steady1 + guards1 >= v.frame_payload_bytes)
            add(issues, "joins", "steady part after joins would overflow the frame");
    }

    if (!issues.empty()) return std::nullopt;

    v.warmup_end = SimTime::from_ns(static_cast<std::int64_t>(
        in.warmup_fraction * double(in.sim_duration.ns())));
    v.n_frames = static_cast<std::uint64_t>(
        (in.sim_duration.ns() + net.frame_duration.ns() - 1) / net.frame_duration.ns());
    v.hp_sizes = in.hp_size_distribution.value_or(in.size_distribution);
    v.be_sizes = in.be_size_distribution.value_or(in.size_distribution);
    v.hp_rate_bps = in.offered_load * in.hp_fraction * double(net.line_rate_bps) /
                    double(net.n_onus);
    v.be_rate_bps = in.offered_load * (1.0 - in.hp_fraction) * double(net.line_rate_bps) /
                    double(net.n_onus);
    v.ranging_error_bound = SimTime::from_ns(static_cast<std::int64_t>(
        net.ranging_error_fraction * double(net.guard_time.ns())));
    return v;
}

/// Result of validate(): either a ValidatedScenario or the complete list
/// of violated invariants (never just the first).
struct ValidationResult {
    std::optional<ValidatedScenario> scenario;
    std::vector<ValidationIssue> issues;

    [[nodiscard]] bool ok() const { return scenario.has_value(); }
    [[nodiscard]] const ValidatedScenario& value() const {
        if (!scenario) throw ConfigError(describe());
        return *scenario;
    }
    [[nodiscard]] std::string describe() const {
        std::string s = "configuration invalid:";
        for (const auto& i : issues) s += "\n  [" + i.key + "] " + i.message;
        return s;
    }
};

inline ValidationResult validate(const ScenarioConfig& cfg) {
    ValidationResult r;
    r.scenario = make_validated(cfg, r.issues);
    return r;
}

} // namespace eposim
