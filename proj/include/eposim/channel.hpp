#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eposim/config.hpp"
#include "eposim/time.hpp"
#include "eposim/types.hpp"

namespace eposim {

/// @brief Upstream channel model: per-ONU one-way propagation delays and
/// an online exclusivity monitor.
///
/// Two upstream transmissions from different ONUs must never overlap at
/// the OLT receiver and must be separated by at least guard_time minus
/// twice the ranging error bound (the guard exists to absorb bounded
/// ranging inaccuracy). Any violation aborts the simulation with a
/// diagnostic naming both transmissions; under a correct schedule this is
/// unreachable, which makes it the ranging/guard correctness check.
class Channel {
    std::vector<SimTime> prop_;
    SimTime min_separation_;
    SimTime last_end_;
    bool has_last_ = false;
    OnuId last_onu_ = 0;
    std::uint64_t observed_ = 0;

public:
    Channel(SimTime guard, SimTime ranging_error_bound) {
        const SimTime slack = ranging_error_bound * 2;
        min_separation_ = guard > slack ? guard - slack : SimTime::zero();
    }

    void set_propagation(OnuId onu, SimTime one_way) {
        if (prop_.size() <= onu) prop_.resize(onu + 1);
        prop_[onu] = one_way;
    }
    [[nodiscard]] SimTime propagation(OnuId onu) const { return prop_.at(onu); }
    [[nodiscard]] std::uint64_t observed_count() const { return observed_; }

    /// Record an upstream burst [start, end) as received at the OLT.
    /// Bursts must be fed in non-decreasing start order.
    void observe(OnuId onu, SimTime start, SimTime end) {
        ++observed_;
        if (has_last_) {
            if (start < last_end_)
                throw SimulationError(
                    "channel overlap at OLT: onu " + std::to_string(onu) + " starts at " +
                    std::to_string(start.ns()) + "ns before onu " +
                    std::to_string(last_onu_) + " ends at " + std::to_string(last_end_.ns()) +
                    "ns");
            if (onu != last_onu_ && start - last_end_ < min_separation_)
                throw SimulationError(
                    "guard violation at OLT: onu " + std::to_string(onu) + " and onu " +
                    std::to_string(last_onu_) + " separated by " +
                    std::to_string((start - last_end_).ns()) + "ns < " +
                    std::to_string(min_separation_.ns()) + "ns");
        }
        has_last_ = true;
        last_onu_ = onu;
        last_end_ = end;
    }
};

} // namespace eposim
