#pragma once

// JSON configuration loading. Times are strings with units ("1ms", "100ns");
// unknown keys anywhere in the document are validation errors.

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "eposim/config.hpp"

namespace eposim {

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& j, const std::set<std::string>& known,
                           const std::string& path, std::vector<ValidationIssue>& issues) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            issues.push_back({path + it.key(), "unknown configuration key"});
}

inline SimTime get_time(const json& j, const char* key, SimTime fallback,
                        std::vector<ValidationIssue>& issues) {
    if (!j.contains(key)) return fallback;
    try {
        if (j[key].is_string()) return parse_time(j[key].get<std::string>());
        if (j[key].is_number_integer()) return SimTime::from_ns(j[key].get<std::int64_t>());
    } catch (const SimError& e) {
        issues.push_back({key, e.what()});
        return fallback;
    }
    issues.push_back({key, "expected a time string like \"1ms\""});
    return fallback;
}

inline SizeDistribution get_dist(const json& arr, const std::string& key,
                                 std::vector<ValidationIssue>& issues) {
    SizeDistribution d;
    if (!arr.is_array()) {
        issues.push_back({key, "expected an array of {size, weight} objects"});
        return d;
    }
    for (const auto& e : arr) {
        if (!e.is_object() || !e.contains("size") || !e.contains("weight")) {
            issues.push_back({key, "each entry needs {size, weight}"});
            continue;
        }
        reject_unknown(e, {"size", "weight"}, key + ".", issues);
        d.entries.push_back({e["size"].get<std::uint32_t>(), e["weight"].get<double>()});
    }
    return d;
}

} // namespace detail

/// Parse a scenario from JSON text. Collects issues instead of throwing so
/// a caller can report every problem at once; returns the raw (unvalidated)
/// config, which must still go through validate().
inline ScenarioConfig parse_config_json(const std::string& text,
                                        std::vector<ValidationIssue>& issues) {
    using detail::json;
    ScenarioConfig cfg;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        issues.push_back({"json", e.what()});
        return cfg;
    }
    if (!j.is_object()) {
        issues.push_back({"json", "top level must be an object"});
        return cfg;
    }

    detail::reject_unknown(j,
                           {"network", "scheduler", "offered_load", "hp_fraction",
                            "sim_duration", "warmup_fraction", "seed",
                            "allow_hp_oversubscription", "size_distribution",
                            "hp_size_distribution", "be_size_distribution", "joins"},
                           "", issues);

    try {
        if (j.contains("network")) {
            const json& n = j["network"];
            detail::reject_unknown(
                n,
                {"n_onus", "line_rate_bps", "frame_duration", "guard_time",
                 "onu_distances_km", "propagation_us_per_km", "subscribed_hp_bps_per_onu",
                 "ranging_interval", "report_overhead_bytes", "lookahead_depth",
                 "queue_capacity_bytes", "min_ranging_distance_km",
                 "max_ranging_distance_km", "ranging_error_fraction",
                 "ranging_reply_bytes", "reply_turnaround"},
                "network.", issues);
            NetworkConfig& net = cfg.network;
            if (n.contains("n_onus")) net.n_onus = n["n_onus"].get<std::uint32_t>();
            if (n.contains("line_rate_bps"))
                net.line_rate_bps = n["line_rate_bps"].get<std::int64_t>();
            net.frame_duration =
                detail::get_time(n, "frame_duration", net.frame_duration, issues);
            net.guard_time = detail::get_time(n, "guard_time", net.guard_time, issues);
            if (n.contains("onu_distances_km"))
                net.onu_distances_km = n["onu_distances_km"].get<std::vector<double>>();
            if (n.contains("propagation_us_per_km"))
                net.propagation_us_per_km = n["propagation_us_per_km"].get<double>();
            if (n.contains("subscribed_hp_bps_per_onu"))
                net.subscribed_hp_bps_per_onu =
                    n["subscribed_hp_bps_per_onu"].get<std::int64_t>();
            net.ranging_interval =
                detail::get_time(n, "ranging_interval", net.ranging_interval, issues);
            if (n.contains("report_overhead_bytes"))
                net.report_overhead_bytes = n["report_overhead_bytes"].get<std::uint32_t>();
            if (n.contains("lookahead_depth"))
                net.lookahead_depth = n["lookahead_depth"].get<std::uint32_t>();
            if (n.contains("queue_capacity_bytes"))
                net.queue_capacity_bytes = n["queue_capacity_bytes"].get<std::int64_t>();
            if (n.contains("min_ranging_distance_km"))
                net.min_ranging_distance_km = n["min_ranging_distance_km"].get<double>();
            if (n.contains("max_ranging_distance_km"))
                net.max_ranging_distance_km = n["max_ranging_distance_km"].get<double>();
            if (n.contains("ranging_error_fraction"))
                net.ranging_error_fraction = n["ranging_error_fraction"].get<double>();
            if (n.contains("ranging_reply_bytes"))
                net.ranging_reply_bytes = n["ranging_reply_bytes"].get<std::uint32_t>();
            net.reply_turnaround =
                detail::get_time(n, "reply_turnaround", net.reply_turnaround, issues);
        }
        if (j.contains("scheduler")) {
            const std::string s = j["scheduler"].get<std::string>();
            if (s == "hssr") cfg.scheduler = SchedulerKind::Hssr;
            else if (s == "ss") cfg.scheduler = SchedulerKind::Ss;
            else issues.push_back({"scheduler", "expected \"hssr\" or \"ss\", got \"" + s + "\""});
        }
        if (j.contains("offered_load")) cfg.offered_load = j["offered_load"].get<double>();
        if (j.contains("hp_fraction")) cfg.hp_fraction = j["hp_fraction"].get<double>();
        cfg.sim_duration = detail::get_time(j, "sim_duration", cfg.sim_duration, issues);
        if (j.contains("warmup_fraction"))
            cfg.warmup_fraction = j["warmup_fraction"].get<double>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("allow_hp_oversubscription"))
            cfg.allow_hp_oversubscription = j["allow_hp_oversubscription"].get<bool>();
        if (j.contains("size_distribution"))
            cfg.size_distribution =
                detail::get_dist(j["size_distribution"], "size_distribution", issues);
        if (j.contains("hp_size_distribution"))
            cfg.hp_size_distribution =
                detail::get_dist(j["hp_size_distribution"], "hp_size_distribution", issues);
        if (j.contains("be_size_distribution"))
            cfg.be_size_distribution =
                detail::get_dist(j["be_size_distribution"], "be_size_distribution", issues);
        if (j.contains("joins")) {
            for (const auto& e : j["joins"]) {
                detail::reject_unknown(e, {"time", "distance_km"}, "joins.", issues);
                JoinScript js;
                js.time = detail::get_time(e, "time", SimTime::zero(), issues);
                if (e.contains("distance_km")) js.distance_km = e["distance_km"].get<double>();
                cfg.joins.push_back(js);
            }
        }
    } catch (const detail::json::exception& e) {
        issues.push_back({"json", e.what()});
    }
    return cfg;
}

inline ScenarioConfig load_config_file(const std::string& path,
                                       std::vector<ValidationIssue>& issues) {
    std::ifstream in(path);
    if (!in) {
        issues.push_back({"config", "cannot open '" + path + "'"});
        return {};
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_config_json(text, issues);
}

} // namespace eposim
