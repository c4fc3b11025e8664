#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eposim/config.hpp"
#include "eposim/rng.hpp"
#include "eposim/types.hpp"

namespace eposim {

/// @brief Mean packet interarrival for a source offering `rate_bps` with
/// sizes drawn from `dist`: E[size] * 8 / rate, as a SimTime. The Poisson
/// arrival rate is its reciprocal. rate 0 means "source never fires".
inline SimTime mean_interarrival(double rate_bps, const SizeDistribution& dist) {
    if (rate_bps <= 0.0) throw ConfigError("mean_interarrival: rate must be positive");
    const double ns = dist.mean_bytes() * 8.0 * 1e9 / rate_bps;
    return SimTime::from_ns(static_cast<std::int64_t>(ns + 0.5));
}

/// @brief One aggregate Poisson packet source per (ONU, class).
///
/// Exponential interarrivals (clamped to >= 1 ns so arrival times are
/// strictly increasing), i.i.d. sizes from the configured distribution.
/// The RNG substream is derived from (seed, onu_id, class) only, so a
/// source's packet sequence is invariant under changes to n_onus or the
/// presence of other sources.
class TrafficSource {
    OnuId onu_;
    ServiceClass klass_;
    double rate_bps_;
    double mean_ns_ = 0.0;
    std::vector<double> cumulative_;
    std::vector<std::uint32_t> sizes_;
    SplitMix64 rng_;
    SimTime next_arrival_;
    bool exhausted_ = false;

public:
    TrafficSource(OnuId onu, ServiceClass klass, double rate_bps,
                  const SizeDistribution& dist, std::uint64_t scenario_seed,
                  SimTime start = SimTime::zero())
        : onu_(onu), klass_(klass), rate_bps_(rate_bps),
          rng_(derive_stream_seed(scenario_seed, onu,
                                  static_cast<std::uint64_t>(klass))),
          next_arrival_(start) {
        if (rate_bps_ <= 0.0) {
            exhausted_ = true;
            return;
        }
        mean_ns_ = static_cast<double>(mean_interarrival(rate_bps_, dist).ns());
        double acc = 0.0;
        for (const auto& e : dist.entries) {
            acc += e.weight;
            cumulative_.push_back(acc);
            sizes_.push_back(e.size_bytes);
        }
        advance();
    }

    [[nodiscard]] bool exhausted() const { return exhausted_; }
    [[nodiscard]] SimTime next_arrival() const { return next_arrival_; }
    [[nodiscard]] OnuId onu() const { return onu_; }
    [[nodiscard]] ServiceClass klass() const { return klass_; }

    /// Produce the packet at next_arrival() and advance the stream.
    Packet emit(PacketId id) {
        Packet p;
        p.id = id;
        p.onu = onu_;
        p.klass = klass_;
        p.effective_class = klass_;
        p.arrival = next_arrival_;
        p.size_bytes = draw_size();
        advance();
        return p;
    }

private:
    std::uint32_t draw_size() {
        const double u = rng_.uniform();
        for (std::size_t i = 0; i < cumulative_.size(); ++i)
            if (u <= cumulative_[i]) return sizes_[i];
        return sizes_.back();
    }

    void advance() {
        const double u = rng_.uniform();
        const double gap = -std::log(1.0 - u) * mean_ns_;
        const auto step = std::max<std::int64_t>(1, static_cast<std::int64_t>(gap + 0.5));
        next_arrival_ += SimTime::from_ns(step);
    }
};

} // namespace eposim
