#pragma once

#include <cassert>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "eposim/config.hpp"
#include "eposim/types.hpp"

namespace eposim {

/// FIFO packet queue with a cached byte total, drop-tail behaviour and
/// drop counters. In HSSR mode an ONU holds one per class; in SS mode a
/// single queue holds both classes in arrival order.
class ClassQueue {
    std::deque<Packet> packets_;
    std::int64_t bytes_ = 0;

public:
    std::int64_t dropped_bytes = 0;
    std::int64_t dropped_packets = 0;

    [[nodiscard]] std::int64_t bytes() const { return bytes_; }
    [[nodiscard]] std::size_t size() const { return packets_.size(); }
    [[nodiscard]] bool empty() const { return packets_.empty(); }
    [[nodiscard]] const Packet& at(std::size_t i) const { return packets_[i]; }

    /// Drop-tail enqueue: returns false (and counts the drop) if adding the
    /// packet would exceed `capacity_bytes`.
    bool enqueue(Packet p, std::int64_t capacity_bytes) {
        if (bytes_ + p.size_bytes > capacity_bytes) {
            dropped_bytes += p.size_bytes;
            dropped_packets += 1;
            return false;
        }
        bytes_ += p.size_bytes;
        packets_.push_back(std::move(p));
        check();
        return true;
    }

    Packet remove_at(std::size_t i) {
        Packet p = std::move(packets_[i]);
        packets_.erase(packets_.begin() + static_cast<std::ptrdiff_t>(i));
        bytes_ -= p.size_bytes;
        check();
        return p;
    }

    /// Byte total of queued packets matching `klass` given the packet's
    /// report class (demoted packets report as BE).
    [[nodiscard]] std::int64_t bytes_of_report_class(ServiceClass klass) const {
        std::int64_t n = 0;
        for (const auto& p : packets_)
            if (report_class(p) == klass) n += p.size_bytes;
        return n;
    }

    static ServiceClass report_class(const Packet& p) {
        return p.demoted ? ServiceClass::BE : p.klass;
    }

private:
    void check() const {
#ifndef NDEBUG
        std::int64_t sum = 0;
        for (const auto& p : packets_) sum += p.size_bytes;
        assert(sum == bytes_ && "ClassQueue byte cache out of sync");
#endif
    }
};

/// @brief Greedy look-ahead slot packing.
///
/// Repeatedly scans positions 0..lookahead-1 of the remaining queue and
/// removes the first packet that fits the remaining budget; stops when a
/// full scan finds none. Selected packets are returned in selection order;
/// the relative order of unselected packets is preserved. The selection
/// never exceeds `slot_bytes` and never fragments a packet.
inline std::vector<Packet> pack_slot(ClassQueue& queue, std::int64_t slot_bytes,
                                     std::uint32_t lookahead) {
    std::vector<Packet> out;
    std::int64_t budget = slot_bytes;
    for (;;) {
        bool took = false;
        const std::size_t window = std::min<std::size_t>(queue.size(), lookahead);
        for (std::size_t i = 0; i < window; ++i) {
            if (queue.at(i).size_bytes <= budget) {
                Packet p = queue.remove_at(i);
                budget -= p.size_bytes;
                out.push_back(std::move(p));
                took = true;
                break;
            }
        }
        if (!took) break;
    }
    return out;
}

/// @brief Ingress rate meter: at most subscribed_bps x frame_duration / 8
/// bytes of HP traffic are admitted per window. The window is the ONU's
/// own grant cycle: it resets at each of the ONU's transmission
/// opportunities (slot starts), which under HSSR recur exactly once per
/// frame.
class IngressMeter {
    std::int64_t budget_bits_;
    std::int64_t used_bits_ = 0;

public:
    explicit IngressMeter(std::int64_t budget_bits) : budget_bits_(budget_bits) {}

    [[nodiscard]] std::int64_t budget_bits() const { return budget_bits_; }
    [[nodiscard]] std::int64_t used_bits() const { return used_bits_; }

    /// True (and charges the meter) if the packet fits the remaining budget.
    bool try_admit(std::uint32_t size_bytes) {
        const std::int64_t bits = std::int64_t(size_bytes) * 8;
        if (used_bits_ + bits > budget_bits_) return false;
        used_bits_ += bits;
        return true;
    }

    void reset_window() { used_bits_ = 0; }
};

enum class AdmitResult : std::uint8_t { Admitted, Demoted, Dropped };

/// What happened to an arriving packet: `demoted` is set even when the
/// packet was subsequently dropped, so drop accounting lands in the right
/// class group.
struct AdmitOutcome {
    AdmitResult result;
    bool demoted;
};

/// Snapshot of both queue lengths, sent once per frame inside the ONU's
/// transmission. Carries only the two byte totals.
struct GrantRequest {
    OnuId onu = 0;
    std::int64_t hp_bytes = 0;
    std::int64_t be_bytes = 0;
    std::uint64_t frame_index = 0;
};

/// Per-ONU lifetime byte counters, kept exact for conservation checks.
struct OnuCounters {
    std::int64_t generated_bytes[2] = {0, 0};   // by original class
    std::int64_t transmitted_bytes[2] = {0, 0}; // by original class
    std::int64_t demoted_bytes = 0;
    std::int64_t promoted_bytes = 0;
};

/// @brief ONU-side MAC: class queues (or one merged FIFO under SS),
/// ingress policing with demotion, promotion into unused steady-slot
/// space, report generation, and grant transmission.
///
/// Single-owner state machine; only the engine's event loop mutates it.
class OnuMac {
public:
    enum class QueueMode : std::uint8_t { ClassQueues, SingleFifo };

private:
    OnuId id_;
    QueueMode mode_;
    ClassQueue hp_;
    ClassQueue be_; ///< in SingleFifo mode all packets live here, arrival order
    IngressMeter meter_;
    std::int64_t capacity_bytes_;
    std::uint32_t lookahead_;
    double distance_km_;
    std::optional<SimTime> ranging_offset_;

public:
    OnuCounters counters;

    OnuMac(OnuId id, QueueMode mode, std::int64_t meter_budget_bits,
           std::int64_t queue_capacity_bytes, std::uint32_t lookahead, double distance_km)
        : id_(id), mode_(mode), meter_(meter_budget_bits),
          capacity_bytes_(queue_capacity_bytes), lookahead_(lookahead),
          distance_km_(distance_km) {}

    [[nodiscard]] OnuId id() const { return id_; }
    [[nodiscard]] double distance_km() const { return distance_km_; }
    [[nodiscard]] bool ranged() const { return ranging_offset_.has_value(); }
    [[nodiscard]] SimTime ranging_offset() const { return *ranging_offset_; }
    void set_ranging_offset(SimTime t) { ranging_offset_ = t; }

    [[nodiscard]] const ClassQueue& hp_queue() const { return hp_; }
    [[nodiscard]] const ClassQueue& be_queue() const { return be_; }
    [[nodiscard]] const IngressMeter& meter() const { return meter_; }

    [[nodiscard]] std::int64_t queued_bytes() const { return hp_.bytes() + be_.bytes(); }
    [[nodiscard]] std::int64_t dropped_bytes() const {
        return hp_.dropped_bytes + be_.dropped_bytes;
    }

    /// Ingress: BE passes through; HP is charged against the meter and
    /// demoted to BE (whole packet, irrevocably) when over budget. Either
    /// queue full => drop-tail. Drops are recorded, never raised.
    AdmitOutcome admit(Packet p) {
        counters.generated_bytes[static_cast<int>(p.klass)] += p.size_bytes;
        if (p.klass == ServiceClass::HP) {
            if (!meter_.try_admit(p.size_bytes)) {
                p.demoted = true;
                p.effective_class = ServiceClass::BE;
                counters.demoted_bytes += p.size_bytes;
                const bool ok = enqueue_be(std::move(p));
                return {ok ? AdmitResult::Demoted : AdmitResult::Dropped, true};
            }
            bool ok;
            if (mode_ == QueueMode::SingleFifo)
                ok = be_.enqueue(std::move(p), 2 * capacity_bytes_);
            else
                ok = hp_.enqueue(std::move(p), capacity_bytes_);
            return {ok ? AdmitResult::Admitted : AdmitResult::Dropped, false};
        }
        const bool ok = enqueue_be(std::move(p));
        return {ok ? AdmitResult::Admitted : AdmitResult::Dropped, false};
    }

    /// Queue snapshot taken at the ONU's transmission opportunity, before
    /// any packets of that slot are removed. Demoted packets count as BE.
    [[nodiscard]] GrantRequest build_report(std::uint64_t frame_index) const {
        GrantRequest r;
        r.onu = id_;
        r.frame_index = frame_index;
        if (mode_ == QueueMode::SingleFifo) {
            r.hp_bytes = be_.bytes_of_report_class(ServiceClass::HP);
            r.be_bytes = be_.bytes() - r.hp_bytes;
        } else {
            r.hp_bytes = hp_.bytes();
            r.be_bytes = be_.bytes();
        }
        return r;
    }

    /// New meter window: called at each of this ONU's slot starts, after
    /// the report snapshot.
    void start_window() { meter_.reset_window(); }

    /// HSSR steady slot. `slot_payload_bytes` excludes the report overhead
    /// (the report always rides first and is reserved by the scheduler).
    /// HP packets pack first; if at least a minimum packet of budget
    /// remains, BE packets are promoted into the residual and marked
    /// effective_class = HP.
    std::vector<Packet> fill_steady_slot(std::int64_t slot_payload_bytes) {
        std::vector<Packet> out = pack_slot(hp_, slot_payload_bytes, lookahead_);
        std::int64_t used = 0;
        for (auto& p : out) used += p.size_bytes;
        const std::int64_t residual = slot_payload_bytes - used;
        if (residual >= 40) {
            std::vector<Packet> promo = pack_slot(be_, residual, lookahead_);
            for (auto& p : promo) {
                if (!p.demoted) {
                    p.effective_class = ServiceClass::HP;
                    counters.promoted_bytes += p.size_bytes;
                }
                out.push_back(std::move(p));
            }
        }
        account_transmitted(out);
        return out;
    }

    /// HSSR dynamic-part grant: BE queue only.
    std::vector<Packet> transmit_grant(std::int64_t grant_bytes) {
        std::vector<Packet> out = pack_slot(be_, grant_bytes, lookahead_);
        account_transmitted(out);
        return out;
    }

    /// SS slot: one arrival-ordered FIFO, classes mixed ("packets of all
    /// priorities in the same slot"). `slot_payload_bytes` excludes the
    /// report.
    std::vector<Packet> transmit_mixed_slot(std::int64_t slot_payload_bytes) {
        std::vector<Packet> out = pack_slot(be_, slot_payload_bytes, lookahead_);
        account_transmitted(out);
        return out;
    }

private:
    bool enqueue_be(Packet p) {
        const std::int64_t cap =
            mode_ == QueueMode::SingleFifo ? 2 * capacity_bytes_ : capacity_bytes_;
        return be_.enqueue(std::move(p), cap);
    }

    void account_transmitted(const std::vector<Packet>& sent) {
        for (const auto& p : sent)
            counters.transmitted_bytes[static_cast<int>(p.klass)] += p.size_bytes;
    }
};

} // namespace eposim
