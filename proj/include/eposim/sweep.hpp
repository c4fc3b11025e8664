#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "eposim/config.hpp"
#include "eposim/engine.hpp"
#include "eposim/metrics.hpp"
#include "eposim/rng.hpp"

namespace eposim {

/// One sweepable parameter and its values. Values are kept as strings and
/// applied to a ScenarioConfig at expansion time.
struct SweepSpec {
    std::string parameter; ///< offered_load | n_onus | guard_time | scheduler
    std::vector<std::string> values;
};

/// Parse "name=a,b,c" or "name=start:stop:step" (numeric ranges, inclusive
/// of stop up to a half-step tolerance).
inline SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw ConfigError("sweep spec '" + text + "' must look like name=values");
    SweepSpec s;
    s.parameter = text.substr(0, eq);
    if (s.parameter != "offered_load" && s.parameter != "n_onus" &&
        s.parameter != "guard_time" && s.parameter != "scheduler")
        throw ConfigError("unknown sweep parameter '" + s.parameter + "'");
    const std::string rhs = text.substr(eq + 1);
    const auto colons = std::count(rhs.begin(), rhs.end(), ':');
    if (colons == 2) {
        double start = 0, stop = 0, step = 0;
        if (std::sscanf(rhs.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 ||
            step <= 0)
            throw ConfigError("bad sweep range '" + rhs + "'");
        for (double v = start; v <= stop + step * 0.5; v += step) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", v);
            s.values.emplace_back(buf);
        }
    } else {
        std::size_t pos = 0;
        while (pos <= rhs.size()) {
            const auto comma = rhs.find(',', pos);
            const std::string v =
                rhs.substr(pos, comma == std::string::npos ? std::string::npos
                                                           : comma - pos);
            if (!v.empty()) s.values.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (s.values.empty()) throw ConfigError("sweep '" + text + "' has no values");
    return s;
}

inline void apply_parameter(ScenarioConfig& cfg, const std::string& name,
                            const std::string& value) {
    if (name == "offered_load") cfg.offered_load = std::stod(value);
    else if (name == "n_onus") {
        cfg.network.n_onus = static_cast<std::uint32_t>(std::stoul(value));
        cfg.network.onu_distances_km.clear(); // re-derive the default spread
    } else if (name == "guard_time") cfg.network.guard_time = parse_time(value);
    else if (name == "scheduler") {
        if (value == "hssr") cfg.scheduler = SchedulerKind::Hssr;
        else if (value == "ss") cfg.scheduler = SchedulerKind::Ss;
        else throw ConfigError("unknown scheduler '" + value + "'");
    } else
        throw ConfigError("unknown parameter '" + name + "'");
}

/// Canonical fingerprint of a point's effective parameters. Per-point
/// seeds are derived from this by value, so adding a sweep dimension
/// whose value a point already had does not perturb that point's seed.
inline std::string point_fingerprint(const ScenarioConfig& cfg) {
    std::string s;
    s += "scheduler=" + std::string(to_string(cfg.scheduler));
    s += ";n_onus=" + std::to_string(cfg.network.n_onus);
    s += ";guard_ns=" + std::to_string(cfg.network.guard_time.ns());
    char load[32];
    std::snprintf(load, sizeof load, "%.9g", cfg.offered_load);
    s += ";offered_load=" + std::string(load);
    s += ";frame_ns=" + std::to_string(cfg.network.frame_duration.ns());
    s += ";sim_ns=" + std::to_string(cfg.sim_duration.ns());
    return s;
}

inline std::uint64_t point_seed(std::uint64_t base_seed, const ScenarioConfig& cfg) {
    return mix64(base_seed ^ fnv1a(point_fingerprint(cfg)));
}

/// Expand the cross-product of sweeps over a base config. Each point gets
/// its own value-derived seed. The cross-product is capped (default 512).
inline std::vector<ScenarioConfig> expand_sweeps(const ScenarioConfig& base,
                                                 const std::vector<SweepSpec>& sweeps,
                                                 std::size_t cap = 512) {
    std::vector<ScenarioConfig> points{base};
    for (const auto& sweep : sweeps) {
        std::vector<ScenarioConfig> next;
        for (const auto& p : points)
            for (const auto& v : sweep.values) {
                ScenarioConfig q = p;
                apply_parameter(q, sweep.parameter, v);
                next.push_back(std::move(q));
            }
        points = std::move(next);
        if (points.size() > cap)
            throw ConfigError("sweep expands to " + std::to_string(points.size()) +
                              " points, cap is " + std::to_string(cap));
    }
    for (auto& p : points) p.seed = point_seed(base.seed, p);
    return points;
}

/// Run all points on a bounded worker pool. Results are positionally
/// stored, so the output is byte-identical for any job count. Every point
/// is validated before any point runs.
inline std::vector<MetricsSummary> run_sweep(const std::vector<ScenarioConfig>& points,
                                             unsigned jobs = 1) {
    std::vector<ValidatedScenario> validated;
    validated.reserve(points.size());
    for (const auto& p : points) {
        ValidationResult r = validate(p);
        if (!r.ok()) throw ConfigError(r.describe());
        validated.push_back(r.value());
    }
    std::vector<MetricsSummary> results(points.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < validated.size(); ++i)
            results[i] = Simulation(validated[i]).run();
        return results;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs);
    for (unsigned w = 0; w < jobs; ++w)
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const std::size_t i = cursor.fetch_add(1);
                    if (i >= validated.size()) return;
                    results[i] = Simulation(validated[i]).run();
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

} // namespace eposim
