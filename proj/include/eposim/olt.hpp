#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "eposim/config.hpp"
#include "eposim/onu.hpp"
#include "eposim/time.hpp"

namespace eposim {

/// OLT-side table row: the last report from an ONU plus the BE fairness
/// counter. The counter equals the number of consecutive frames in which
/// the ONU requested BE bandwidth but received no dynamic grant.
struct OnuRecord {
    OnuId onu = 0;
    GrantRequest last_report;
    std::uint64_t counter = 0;
    std::int64_t subscribed_hp_bytes_per_frame = 0;
    bool ranged = false;
    SimTime ranging_offset;
};

/// One scheduled transmission window inside a frame.
struct SlotGrant {
    OnuId onu = 0;
    SimTime offset;             ///< from frame start
    std::int64_t length_bytes = 0; ///< payload bytes, excluding any report overhead
    SimTime duration;           ///< on-air time including report overhead where applicable
};

/// @brief Per-frame allocation: fixed steady slots (HSSR only) plus
/// dynamic-part grants, all pairwise non-overlapping and separated by
/// >= guard_time when adjacent transmissions come from different ONUs.
struct FrameSchedule {
    std::uint64_t frame_index = 0;
    std::vector<SlotGrant> steady_slots;
    std::vector<SlotGrant> dynamic_grants;
    bool quiesced = false;
    std::uint32_t total_guard_count = 0;
    SimTime steady_end; ///< end of the steady part (frame-relative)

    /// Exact guard accounting: sum of slot/grant durations plus guards
    /// must fit the frame.
    [[nodiscard]] SimTime busy_plus_guards(SimTime guard) const {
        SimTime total = guard * total_guard_count;
        for (const auto& s : steady_slots) total += s.duration;
        for (const auto& g : dynamic_grants) total += g.duration;
        return total;
    }
};

/// Per-ONU view of the next frame's schedule, delivered downstream before
/// that frame starts (alignment assumption).
struct GrantReply {
    std::uint64_t frame_index = 0;
    FrameSchedule schedule; // shared view; ONUs read their own entries
};

/// @brief Strategy interface: pure function of (table snapshot, config,
/// frame index) to a FrameSchedule. Counter updates are applied by the
/// OLT afterwards from the schedule itself, so strategies stay pure.
class DbaScheduler {
public:
    virtual ~DbaScheduler() = default;
    [[nodiscard]] virtual std::string_view name() const = 0;
    [[nodiscard]] virtual FrameSchedule allocate(const std::vector<OnuRecord>& table,
                                                 const ValidatedScenario& cfg,
                                                 std::uint64_t frame_index,
                                                 bool quiesce_dynamic) const = 0;
};

/// @brief Hybrid slot-size/rate DBA: a steady part of N fixed
/// subscription-sized HP slots at offsets that never move, then a dynamic
/// part that either carries every BE request (all-fit) or is dedicated
/// whole to the single requester maximizing be_bytes x (counter + 1).
class HssrScheduler final : public DbaScheduler {
public:
    [[nodiscard]] std::string_view name() const override { return "hssr"; }

    [[nodiscard]] FrameSchedule allocate(const std::vector<OnuRecord>& table,
                                         const ValidatedScenario& cfg,
                                         std::uint64_t frame_index,
                                         bool quiesce_dynamic) const override {
        const auto& net = cfg.cfg.network;
        FrameSchedule sched;
        sched.frame_index = frame_index;
        sched.quiesced = quiesce_dynamic;

        SimTime at = SimTime::zero();
        for (const auto& rec : table) {
            if (!rec.ranged) continue;
            at += net.guard_time;
            sched.total_guard_count += 1;
            SlotGrant s;
            s.onu = rec.onu;
            s.offset = at;
            s.length_bytes = rec.subscribed_hp_bytes_per_frame;
            s.duration = bytes_to_duration(
                s.length_bytes + net.report_overhead_bytes, net.line_rate_bps);
            at += s.duration;
            sched.steady_slots.push_back(s);
        }
        sched.steady_end = at;
        if (quiesce_dynamic) return sched;

        struct Req {
            OnuId onu;
            std::int64_t be;
            std::uint64_t counter;
        };
        std::vector<Req> requests;
        for (const auto& rec : table)
            if (rec.ranged && rec.last_report.be_bytes > 0)
                requests.push_back({rec.onu, rec.last_report.be_bytes, rec.counter});
        if (requests.empty()) return sched;

        const SimTime span = net.frame_duration - sched.steady_end;
        SimTime need = SimTime::zero();
        for (const auto& r : requests)
            need += net.guard_time + bytes_to_duration(r.be, net.line_rate_bps);

        if (need <= span) {
            // All requests fit: grant every requester its full demand.
            for (const auto& r : requests) {
                at += net.guard_time;
                sched.total_guard_count += 1;
                SlotGrant g;
                g.onu = r.onu;
                g.offset = at;
                g.length_bytes = r.be;
                g.duration = bytes_to_duration(r.be, net.line_rate_bps);
                at += g.duration;
                sched.dynamic_grants.push_back(g);
            }
        } else {
            // Overload: the whole dynamic part goes to the requester with
            // the largest be_bytes x (counter + 1); ties to lowest onu_id.
            const Req* winner = &requests.front();
            auto weight = [](const Req& r) {
                return static_cast<unsigned __int128>(r.be) * (r.counter + 1);
            };
            for (const auto& r : requests)
                if (weight(r) > weight(*winner) ||
                    (weight(r) == weight(*winner) && r.onu < winner->onu))
                    winner = &r;
            SlotGrant g;
            g.onu = winner->onu;
            g.offset = sched.steady_end + net.guard_time;
            g.length_bytes = duration_to_bytes(span - net.guard_time, net.line_rate_bps);
            g.duration = bytes_to_duration(g.length_bytes, net.line_rate_bps);
            sched.total_guard_count += 1;
            sched.dynamic_grants.push_back(g);
        }
        return sched;
    }
};

/// @brief Conventional slot-size DBA: no steady part; every ONU gets one
/// slot per frame sized min(q_i, floor(P * q_i / sum q)) where q mixes
/// both classes, laid consecutively from the frame start in onu_id order.
/// Slot offsets therefore move from frame to frame. Counters unused.
class SsScheduler final : public DbaScheduler {
public:
    [[nodiscard]] std::string_view name() const override { return "ss"; }

    [[nodiscard]] FrameSchedule allocate(const std::vector<OnuRecord>& table,
                                         const ValidatedScenario& cfg,
                                         std::uint64_t frame_index,
                                         bool /*quiesce*/) const override {
        const auto& net = cfg.cfg.network;
        FrameSchedule sched;
        sched.frame_index = frame_index;

        std::uint32_t n_active = 0;
        std::int64_t total_q = 0;
        for (const auto& rec : table)
            if (rec.ranged) {
                ++n_active;
                total_q += rec.last_report.hp_bytes + rec.last_report.be_bytes;
            }
        const std::int64_t payload =
            duration_to_bytes(net.frame_duration - net.guard_time * n_active,
                              net.line_rate_bps) -
            std::int64_t(n_active) * net.report_overhead_bytes;

        SimTime at = SimTime::zero();
        for (const auto& rec : table) {
            if (!rec.ranged) continue;
            const std::int64_t q = rec.last_report.hp_bytes + rec.last_report.be_bytes;
            std::int64_t slot = 0;
            if (total_q > 0)
                slot = std::min<std::int64_t>(
                    q, static_cast<std::int64_t>(int128(payload) * q / total_q));
            at += net.guard_time;
            sched.total_guard_count += 1;
            SlotGrant s;
            s.onu = rec.onu;
            s.offset = at;
            s.length_bytes = slot;
            s.duration = bytes_to_duration(slot + net.report_overhead_bytes,
                                           net.line_rate_bps);
            at += s.duration;
            sched.dynamic_grants.push_back(s);
        }
        sched.steady_end = SimTime::zero();
        return sched;
    }
};

inline std::unique_ptr<DbaScheduler> make_scheduler(SchedulerKind kind) {
    if (kind == SchedulerKind::Hssr) return std::make_unique<HssrScheduler>();
    return std::make_unique<SsScheduler>();
}

/// Ranging controller state.
struct RangingState {
    enum class Phase : std::uint8_t { Idle, TokenSent, Completed };
    Phase phase = Phase::Idle;
    std::size_t join_index = 0; ///< next scripted join to serve
    SimTime token_time;
    SimTime window_lo;
    SimTime window_hi;
    SimTime last_attempt;
    bool ever_attempted = false;
};

/// @brief OLT-side MAC: the per-ONU record table, report registration,
/// counter maintenance, schedule production and the quasi-non-intrusive
/// ranging controller.
class Olt {
    std::vector<OnuRecord> table_;
    std::unique_ptr<DbaScheduler> scheduler_;
    RangingState ranging_;

public:
    Olt(std::uint32_t n_onus, std::int64_t subscribed_hp_bytes_per_frame,
        SchedulerKind kind)
        : scheduler_(make_scheduler(kind)) {
        table_.resize(n_onus);
        for (std::uint32_t i = 0; i < n_onus; ++i) {
            table_[i].onu = i;
            table_[i].subscribed_hp_bytes_per_frame = subscribed_hp_bytes_per_frame;
        }
    }

    [[nodiscard]] const std::vector<OnuRecord>& table() const { return table_; }
    [[nodiscard]] RangingState& ranging() { return ranging_; }
    [[nodiscard]] const DbaScheduler& scheduler() const { return *scheduler_; }

    void mark_ranged(OnuId onu, SimTime offset) {
        record(onu).ranged = true;
        record(onu).ranging_offset = offset;
    }

    /// Table update on report arrival: replaces last_report, leaves the
    /// counter untouched (counters change only with allocation outcomes).
    void register_report(const GrantRequest& req) {
        if (req.onu >= table_.size())
            throw ProtocolError("register_report: unknown onu " + std::to_string(req.onu));
        OnuRecord& rec = table_[req.onu];
        if (!rec.ranged)
            throw ProtocolError("register_report: report from unranged onu " +
                                std::to_string(req.onu));
        rec.last_report = req;
    }

    FrameSchedule allocate(const ValidatedScenario& cfg, std::uint64_t frame_index,
                           bool quiesce_dynamic) {
        FrameSchedule sched = scheduler_->allocate(table_, cfg, frame_index, quiesce_dynamic);
        apply_counter_law(sched);
        return sched;
    }

    /// Counter law: +1 iff (be_bytes > 0 and no dynamic grant this frame),
    /// reset to 0 iff granted, else unchanged. Applies to the HSSR
    /// scheduler; SS does not use counters.
    void apply_counter_law(const FrameSchedule& sched) {
        if (scheduler_->name() != "hssr") return;
        for (auto& rec : table_) {
            if (!rec.ranged) continue;
            const bool requested = rec.last_report.be_bytes > 0;
            bool granted = false;
            for (const auto& g : sched.dynamic_grants)
                if (g.onu == rec.onu) granted = true;
            if (granted)
                rec.counter = 0;
            else if (requested)
                rec.counter += 1;
        }
    }

    /// Add a newly ranged ONU to the table; it receives a steady slot from
    /// the next frame on (layout recomputed once; offsets then fixed again).
    void add_onu(OnuId onu, std::int64_t subscribed_hp_bytes_per_frame, SimTime offset) {
        OnuRecord rec;
        rec.onu = onu;
        rec.subscribed_hp_bytes_per_frame = subscribed_hp_bytes_per_frame;
        rec.ranged = true;
        rec.ranging_offset = offset;
        table_.push_back(rec);
        std::sort(table_.begin(), table_.end(),
                  [](const OnuRecord& a, const OnuRecord& b) { return a.onu < b.onu; });
    }

private:
    OnuRecord& record(OnuId onu) {
        if (onu >= table_.size()) throw ProtocolError("unknown onu id");
        return table_[onu];
    }
};

/// Reply window for a ranging token emitted at `token_time`:
/// [token + 2 min_prop + turnaround, token + 2 max_prop + turnaround + reply_duration].
struct RangingWindow {
    SimTime token_time; ///< absolute
    SimTime lo;         ///< absolute, earliest reply arrival
    SimTime hi;         ///< absolute, latest reply burst end
};

/// @brief Place the ranging token inside a quiesced frame so that the
/// reply window is guaranteed to land in the (empty) dynamic part:
/// token = frame_start + max(0, steady_end + guard - 2 min_prop - turnaround).
inline RangingWindow schedule_ranging_window(const ValidatedScenario& cfg,
                                             SimTime frame_start, SimTime steady_end) {
    const auto& net = cfg.cfg.network;
    const SimTime min_rtt = cfg.prop_delay(net.min_ranging_distance_km) * 2;
    const SimTime max_rtt = cfg.prop_delay(net.max_ranging_distance_km) * 2;
    const SimTime reply_dur = bytes_to_duration(net.ranging_reply_bytes, net.line_rate_bps);
    const SimTime lead = min_rtt + net.reply_turnaround;
    SimTime token = frame_start;
    const SimTime target_lo = steady_end + net.guard_time;
    if (lead < target_lo) token = frame_start + (target_lo - lead);
    RangingWindow w;
    w.token_time = token;
    w.lo = token + lead;
    w.hi = token + max_rtt + net.reply_turnaround + reply_dur;
    if (w.hi > frame_start + net.frame_duration)
        throw ConfigError("frame too small for non-intrusive ranging");
    return w;
}

/// Measured round-trip from a reply inside the published window.
/// Returns the new ONU's ranging offset (the measured RTT).
inline SimTime complete_ranging(SimTime reply_arrival, SimTime token_time,
                                SimTime reply_turnaround) {
    return reply_arrival - token_time - reply_turnaround;
}

} // namespace eposim
