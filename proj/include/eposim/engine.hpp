#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "eposim/channel.hpp"
#include "eposim/config.hpp"
#include "eposim/metrics.hpp"
#include "eposim/olt.hpp"
#include "eposim/onu.hpp"
#include "eposim/rng.hpp"
#include "eposim/traffic.hpp"

namespace eposim {

/// Event kinds in tie-break priority order: events with equal timestamps
/// are processed in ascending (kind, sequence) order.
enum class EventKind : std::uint8_t {
    FrameStart = 0,
    SlotStart = 1,
    GrantTransmission = 2,
    PacketArrival = 3,
    ReportDelivery = 4,
    RangingToken = 5,
    RangingReply = 6,
    SimEnd = 7,
};

struct Event {
    SimTime time;
    EventKind kind = EventKind::SimEnd;
    std::uint64_t seq = 0; ///< final tie-breaker, assigned at push
    std::uint32_t onu = 0;
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::uint64_t frame = 0;
};

struct EventAfter {
    bool operator()(const Event& x, const Event& y) const {
        if (x.time != y.time) return x.time > y.time;
        if (x.kind != y.kind) return x.kind > y.kind;
        return x.seq > y.seq;
    }
};

enum class TraceKind : std::uint8_t {
    FrameStart = 0,
    TxPacket = 1,
    Report = 2,
    RangingToken = 3,
    RangingReply = 4,
    JoinComplete = 5,
    RangingFailed = 6,
    Drop = 7,
};

/// Compact trace record; `flags` bit 0 = original class BE, bit 1 =
/// steady-slot transmission, bit 2 = promoted, bit 3 = demoted,
/// bit 4 = quiesced frame.
struct TraceRecord {
    std::int64_t time_ns;
    TraceKind kind;
    std::uint8_t flags;
    std::uint16_t onu;
    std::uint32_t a; ///< size in bytes / report bytes / join index
    std::uint64_t frame;
};

inline std::string to_line(const TraceRecord& r) {
    static constexpr const char* names[] = {"frame_start", "tx",           "report",
                                            "ranging_token", "ranging_reply", "join_complete",
                                            "ranging_failed", "drop"};
    std::string s = std::to_string(r.time_ns) + ',' +
                    names[static_cast<int>(r.kind)] + ',' + std::to_string(r.onu) + ',';
    s += "frame=" + std::to_string(r.frame) + " a=" + std::to_string(r.a) +
         " flags=" + std::to_string(r.flags);
    return s;
}

struct SimOptions {
    bool collect_trace = false;
};

/// @brief Deterministic discrete-event loop binding sources, ONUs, the OLT
/// and the channel model. One instance is strictly single-threaded;
/// identical (seed, config) produce an identical event trace.
class Simulation {
    ValidatedScenario cfg_;
    SimOptions opts_;
    Olt olt_;
    std::vector<OnuMac> onus_;
    std::vector<TrafficSource> sources_;
    std::vector<std::int64_t> misalign_ns_; ///< per-ONU arrival shift from ranging error
    Channel channel_;
    MetricsCollector metrics_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    SimTime clock_;
    std::uint64_t seq_ = 0;
    PacketId next_packet_id_ = 1;
    SimTime sim_end_;
    SplitMix64 ranging_rng_;
    std::uint64_t trace_hash_ = 0xCBF29CE484222325ULL;
    std::vector<TraceRecord> trace_;
    std::uint64_t frames_done_ = 0;
    std::int64_t guard_ns_accum_ = 0;
    std::uint64_t steady_layout_checks_ = 0;
    std::vector<SimTime> steady_offsets_;  ///< current epoch's fixed offsets
    std::size_t steady_epoch_size_ = 0;    ///< table size the offsets belong to
    FrameSchedule current_;
    bool current_quiesced_ = false;
    RangingWindow window_;
    SimTime reply_duration_;
    std::uint64_t current_frame_ = 0;

public:
    explicit Simulation(const ValidatedScenario& cfg, SimOptions opts = {})
        : cfg_(cfg), opts_(opts),
          olt_(cfg.cfg.network.n_onus, cfg.hp_slot_payload_bytes, cfg.cfg.scheduler),
          channel_(cfg.cfg.network.guard_time, cfg.ranging_error_bound),
          metrics_(cfg.warmup_end),
          ranging_rng_(derive_stream_seed(cfg.cfg.seed, 0x52414E47u, 7)) {
        const auto& net = cfg_.cfg.network;
        sim_end_ = net.frame_duration * static_cast<std::int64_t>(cfg_.n_frames);
        reply_duration_ = bytes_to_duration(net.ranging_reply_bytes, net.line_rate_bps);

        const auto mode = cfg_.cfg.scheduler == SchedulerKind::Ss
                              ? OnuMac::QueueMode::SingleFifo
                              : OnuMac::QueueMode::ClassQueues;
        misalign_ns_.assign(net.n_onus + cfg_.cfg.joins.size(), 0);
        for (OnuId i = 0; i < net.n_onus; ++i) {
            onus_.emplace_back(i, mode, cfg_.hp_budget_bits, net.queue_capacity_bytes,
                               net.lookahead_depth, cfg_.distances_km[i]);
            const SimTime prop = cfg_.prop_delay(cfg_.distances_km[i]);
            onus_.back().set_ranging_offset(prop * 2); // pre-ranged at start
            olt_.mark_ranged(i, prop * 2);
            channel_.set_propagation(i, prop);
            add_source(i, ServiceClass::HP, cfg_.hp_rate_bps, cfg_.hp_sizes,
                       SimTime::zero());
            add_source(i, ServiceClass::BE, cfg_.be_rate_bps, cfg_.be_sizes,
                       SimTime::zero());
        }
        push(Event{SimTime::zero(), EventKind::FrameStart, 0, 0, 0, 0, 0});
        push(Event{sim_end_, EventKind::SimEnd, 0, 0, 0, 0, 0});
    }

    [[nodiscard]] const std::vector<TraceRecord>& trace() const { return trace_; }
    [[nodiscard]] std::uint64_t trace_hash() const { return trace_hash_; }
    [[nodiscard]] std::uint64_t steady_layout_checks() const { return steady_layout_checks_; }
    [[nodiscard]] const std::vector<OnuMac>& onus() const { return onus_; }
    [[nodiscard]] const Olt& olt() const { return olt_; }

    /// Process exactly one event; the clock never decreases. Returns false
    /// once SimEnd has been reached.
    bool step() {
        const Event ev = pop();
        if (ev.kind == EventKind::SimEnd) return false;
        dispatch(ev);
        return true;
    }

    /// Run to completion and return the finalized summary.
    MetricsSummary run() {
        while (step()) {
        }
        check_conservation();
        return finalize();
    }

private:
    void add_source(OnuId onu, ServiceClass k, double rate, const SizeDistribution& dist,
                    SimTime start) {
        sources_.emplace_back(onu, k, rate, dist, cfg_.cfg.seed, start);
        TrafficSource& src = sources_.back();
        if (!src.exhausted() && src.next_arrival() < sim_end_)
            push(Event{src.next_arrival(), EventKind::PacketArrival, 0, 0,
                       static_cast<std::int64_t>(sources_.size() - 1), 0, 0});
    }

    void push(Event ev) {
        ev.seq = seq_++;
        queue_.push(ev);
    }

    Event pop() {
        if (queue_.empty())
            throw SimulationError("event queue exhausted before SimEnd");
        Event ev = queue_.top();
        queue_.pop();
        if (ev.time < clock_)
            throw SimulationError("clock monotonicity violated");
        clock_ = ev.time;
        return ev;
    }

    void trace(TraceKind kind, std::uint8_t flags, OnuId onu, std::uint32_t a,
               std::optional<SimTime> at = std::nullopt) {
        TraceRecord r{at.value_or(clock_).ns(), kind, flags,
                      static_cast<std::uint16_t>(onu), a, current_frame_};
        char buf[sizeof(TraceRecord)];
        __builtin_memcpy(buf, &r, sizeof r);
        trace_hash_ = fnv1a(buf, sizeof buf, trace_hash_);
        if (opts_.collect_trace) trace_.push_back(r);
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
        case EventKind::FrameStart: on_frame_start(ev.frame); break;
        case EventKind::SlotStart: on_slot_start(ev); break;
        case EventKind::GrantTransmission: on_grant(ev); break;
        case EventKind::PacketArrival: on_arrival(ev); break;
        case EventKind::ReportDelivery: on_report(ev); break;
        case EventKind::RangingToken: on_token(ev); break;
        case EventKind::RangingReply: on_reply(ev); break;
        case EventKind::SimEnd: break;
        }
    }

    void on_frame_start(std::uint64_t k) {
        const auto& net = cfg_.cfg.network;
        current_frame_ = k;
        const SimTime base = clock_;

        // Ranging is attempted when a scripted join is due and the
        // minimum spacing since the previous attempt has elapsed.
        RangingState& rs = olt_.ranging();
        bool quiesce = false;
        if (rs.phase == RangingState::Phase::Idle &&
            rs.join_index < cfg_.cfg.joins.size() &&
            cfg_.cfg.joins[rs.join_index].time <= base &&
            (!rs.ever_attempted || base - rs.last_attempt >= net.ranging_interval))
            quiesce = true;

        current_ = olt_.allocate(cfg_, k, quiesce);
        current_quiesced_ = quiesce;

        // Frame accounting, exact for every frame.
        if (current_.busy_plus_guards(net.guard_time) > net.frame_duration)
            throw SimulationError("frame accounting violated at frame " + std::to_string(k));
        guard_ns_accum_ += net.guard_time.ns() * current_.total_guard_count;

        check_steady_layout();
        trace(TraceKind::FrameStart, quiesce ? 0x10 : 0, 0,
              static_cast<std::uint32_t>(current_.dynamic_grants.size()));

        for (const auto& s : current_.steady_slots)
            push(Event{base + s.offset, EventKind::SlotStart, 0, s.onu, s.length_bytes, 0,
                       k});
        if (cfg_.cfg.scheduler == SchedulerKind::Ss) {
            for (const auto& g : current_.dynamic_grants)
                push(Event{base + g.offset, EventKind::SlotStart, 0, g.onu, g.length_bytes,
                           0, k});
        } else {
            for (const auto& g : current_.dynamic_grants)
                push(Event{base + g.offset, EventKind::GrantTransmission, 0, g.onu,
                           g.length_bytes, 0, k});
        }

        if (quiesce) {
            rs.phase = RangingState::Phase::TokenSent;
            rs.ever_attempted = true;
            rs.last_attempt = base;
            window_ = schedule_ranging_window(cfg_, base, current_.steady_end);
            push(Event{window_.token_time, EventKind::RangingToken, 0, 0,
                       static_cast<std::int64_t>(rs.join_index), 0, k});
        }

        if (k + 1 < cfg_.n_frames)
            push(Event{base + net.frame_duration, EventKind::FrameStart, 0, 0, 0, 0, k + 1});

        check_frame_conservation();
    }

    void on_slot_start(const Event& ev) {
        const auto& net = cfg_.cfg.network;
        OnuMac& onu = onus_[ev.onu];
        const GrantRequest report = onu.build_report(ev.frame);
        const SimTime report_dur =
            bytes_to_duration(net.report_overhead_bytes, net.line_rate_bps);
        push(Event{clock_ + report_dur, EventKind::ReportDelivery, 0, ev.onu,
                   report.hp_bytes, report.be_bytes, ev.frame});
        trace(TraceKind::Report, current_quiesced_ ? 0x10 : 0, ev.onu,
              static_cast<std::uint32_t>(report.hp_bytes + report.be_bytes));
        onu.start_window();

        std::vector<Packet> txs = cfg_.cfg.scheduler == SchedulerKind::Ss
                                      ? onu.transmit_mixed_slot(ev.a)
                                      : onu.fill_steady_slot(ev.a);
        SimTime cursor = clock_ + report_dur;
        const std::uint8_t base_flags =
            static_cast<std::uint8_t>((cfg_.cfg.scheduler == SchedulerKind::Hssr ? 2 : 0) |
                                      (current_quiesced_ ? 0x10 : 0));
        for (Packet& p : txs) {
            cursor += bytes_to_duration(p.size_bytes, net.line_rate_bps);
            p.departure = cursor;
            metrics_.record(p);
            std::uint8_t flags = base_flags;
            if (p.klass == ServiceClass::BE) flags |= 1;
            if (p.effective_class == ServiceClass::HP && p.klass == ServiceClass::BE)
                flags |= 4;
            if (p.demoted) flags |= 8;
            trace(TraceKind::TxPacket, flags, ev.onu, p.size_bytes, cursor);
        }
        observe_burst(ev.onu, clock_, cursor);
    }

    void on_grant(const Event& ev) {
        const auto& net = cfg_.cfg.network;
        OnuMac& onu = onus_[ev.onu];
        std::vector<Packet> txs = onu.transmit_grant(ev.a);
        if (txs.empty()) return; // unused grant: the ONU stays silent
        SimTime cursor = clock_;
        for (Packet& p : txs) {
            cursor += bytes_to_duration(p.size_bytes, net.line_rate_bps);
            p.departure = cursor;
            metrics_.record(p);
            std::uint8_t flags = 0;
            if (p.klass == ServiceClass::BE) flags |= 1;
            if (p.demoted) flags |= 8;
            trace(TraceKind::TxPacket, flags, ev.onu, p.size_bytes, cursor);
        }
        observe_burst(ev.onu, clock_, cursor);
    }

    void on_arrival(const Event& ev) {
        TrafficSource& src = sources_[static_cast<std::size_t>(ev.a)];
        Packet p = src.emit(next_packet_id_++);
        const auto klass = p.klass;
        const auto size = p.size_bytes;
        const auto arrival = p.arrival;
        const OnuId onu = p.onu;
        const AdmitOutcome out = onus_[onu].admit(std::move(p));
        metrics_.on_generated(klass, out.demoted, size, arrival);
        if (out.result == AdmitResult::Dropped) {
            metrics_.on_dropped(klass, out.demoted, size);
            trace(TraceKind::Drop, out.demoted ? 8 : 0, onu, size);
        }
        if (!src.exhausted() && src.next_arrival() < sim_end_)
            push(Event{src.next_arrival(), EventKind::PacketArrival, 0, 0, ev.a, 0, 0});
    }

    void on_report(const Event& ev) {
        // Alignment soundness: a report generated in frame k must land
        // before frame k+1 starts (and thus before its first slot).
        const SimTime frame_end =
            cfg_.cfg.network.frame_duration * static_cast<std::int64_t>(ev.frame + 1);
        if (clock_ > frame_end)
            throw SimulationError("report delivered past its frame boundary");
        GrantRequest req;
        req.onu = ev.onu;
        req.hp_bytes = ev.a;
        req.be_bytes = ev.b;
        req.frame_index = ev.frame;
        olt_.register_report(req);
    }

    void on_token(const Event& ev) {
        const auto idx = static_cast<std::size_t>(ev.a);
        const JoinScript& join = cfg_.cfg.joins[idx];
        const SimTime rtt = cfg_.prop_delay(join.distance_km) * 2;
        push(Event{clock_ + rtt + cfg_.cfg.network.reply_turnaround,
                   EventKind::RangingReply, 0, 0, static_cast<std::int64_t>(idx), 0,
                   ev.frame});
        trace(TraceKind::RangingToken, 0x10, 0, static_cast<std::uint32_t>(idx));
    }

    void on_reply(const Event& ev) {
        const auto& net = cfg_.cfg.network;
        RangingState& rs = olt_.ranging();
        const auto idx = static_cast<std::size_t>(ev.a);
        const OnuId new_id = net.n_onus + static_cast<OnuId>(idx);

        if (clock_ < window_.lo || clock_ + reply_duration_ > window_.hi) {
            rs.phase = RangingState::Phase::Idle; // retry at the next interval
            trace(TraceKind::RangingFailed, 0, new_id, static_cast<std::uint32_t>(idx));
            return;
        }
        observe_burst(new_id, clock_, clock_ + reply_duration_);

        const SimTime measured =
            complete_ranging(clock_, window_.token_time, net.reply_turnaround);
        const std::int64_t bound = cfg_.ranging_error_bound.ns();
        const std::int64_t err =
            bound == 0 ? 0 : ranging_rng_.uniform_int(-bound, bound);
        misalign_ns_[new_id] = -err;

        const auto mode = OnuMac::QueueMode::ClassQueues; // joins require hssr
        onus_.emplace_back(new_id, mode, cfg_.hp_budget_bits, net.queue_capacity_bytes,
                           net.lookahead_depth, join_distance(idx));
        onus_.back().set_ranging_offset(SimTime::from_ns(measured.ns() + err));
        channel_.set_propagation(new_id, cfg_.prop_delay(join_distance(idx)));
        olt_.add_onu(new_id, cfg_.hp_slot_payload_bytes,
                     SimTime::from_ns(measured.ns() + err));
        add_source(new_id, ServiceClass::HP, cfg_.hp_rate_bps, cfg_.hp_sizes, clock_);
        add_source(new_id, ServiceClass::BE, cfg_.be_rate_bps, cfg_.be_sizes, clock_);

        rs.join_index = idx + 1;
        rs.phase = rs.join_index < cfg_.cfg.joins.size() ? RangingState::Phase::Idle
                                                         : RangingState::Phase::Completed;
        trace(TraceKind::JoinComplete, 0, new_id,
              static_cast<std::uint32_t>(measured.ns() / 1000));
    }

    [[nodiscard]] double join_distance(std::size_t idx) const {
        return cfg_.cfg.joins[idx].distance_km;
    }

    /// Channel sees the burst shifted by the ONU's residual ranging error.
    void observe_burst(OnuId onu, SimTime start, SimTime end) {
        const std::int64_t shift = onu < misalign_ns_.size() ? misalign_ns_[onu] : 0;
        channel_.observe(onu, SimTime::from_ns(start.ns() + shift),
                         SimTime::from_ns(end.ns() + shift));
    }

    /// Under HSSR with a fixed population, steady-slot offsets must be
    /// bit-identical in every frame of an epoch (population change opens a
    /// new epoch).
    void check_steady_layout() {
        if (cfg_.cfg.scheduler != SchedulerKind::Hssr) return;
        if (current_.steady_slots.size() != steady_epoch_size_) {
            steady_epoch_size_ = current_.steady_slots.size();
            steady_offsets_.clear();
            for (const auto& s : current_.steady_slots) steady_offsets_.push_back(s.offset);
            return;
        }
        for (std::size_t i = 0; i < current_.steady_slots.size(); ++i)
            if (current_.steady_slots[i].offset != steady_offsets_[i])
                throw SimulationError("steady slot offset moved at frame " +
                                      std::to_string(current_frame_));
        ++steady_layout_checks_;
    }

    void check_frame_conservation() const {
        for (const auto& o : onus_) {
            const std::int64_t gen =
                o.counters.generated_bytes[0] + o.counters.generated_bytes[1];
            const std::int64_t tx =
                o.counters.transmitted_bytes[0] + o.counters.transmitted_bytes[1];
            if (gen != tx + o.queued_bytes() + o.dropped_bytes())
                throw SimulationError("conservation violated for onu " +
                                      std::to_string(o.id()));
        }
    }

    void check_conservation() const { check_frame_conservation(); }

    MetricsSummary finalize() {
        std::int64_t demoted = 0, promoted = 0;
        for (const auto& o : onus_) {
            demoted += o.counters.demoted_bytes;
            promoted += o.counters.promoted_bytes;
        }
        frames_done_ = cfg_.n_frames;
        const double guard_fraction =
            static_cast<double>(guard_ns_accum_) / static_cast<double>(sim_end_.ns());
        MetricsSummary s = metrics_.finalize(frames_done_, guard_fraction, demoted,
                                             promoted, trace_hash_);
        s.scheduler = std::string(to_string(cfg_.cfg.scheduler));
        s.n_onus = cfg_.cfg.network.n_onus;
        s.guard_time_ns = cfg_.cfg.network.guard_time.ns();
        s.offered_load = cfg_.cfg.offered_load;
        s.seed = cfg_.cfg.seed;
        s.hp_fraction = cfg_.cfg.hp_fraction;
        s.frame_ns = cfg_.cfg.network.frame_duration.ns();
        s.sim_ns = sim_end_.ns();
        s.lookahead = cfg_.cfg.network.lookahead_depth;
        return s;
    }
};

/// Convenience: validate-or-throw, then run.
inline MetricsSummary run_scenario(const ScenarioConfig& cfg, SimOptions opts = {}) {
    ValidationResult r = validate(cfg);
    if (!r.ok()) throw ConfigError(r.describe());
    Simulation sim(r.value(), opts);
    return sim.run();
}

} // namespace eposim
