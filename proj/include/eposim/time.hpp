#pragma once

#include <charconv>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eposim {

/// Base error for everything the simulator can throw.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (also raised on arithmetic that
/// only a bad configuration can trigger, e.g. byte/duration overflow).
struct ConfigError : SimError {
    using SimError::SimError;
};

/// A component received a message it cannot accept (unknown ONU, overlapping
/// grants, ...). Indicates a protocol bug, not an operator mistake.
struct ProtocolError : SimError {
    using SimError::SimError;
};

/// Internal consistency violation detected at runtime (channel overlap,
/// non-monotonic clock). The simulation aborts loudly.
struct SimulationError : SimError {
    using SimError::SimError;
};

/// @brief Simulation time: integer nanoseconds since simulation start.
///
/// One type serves both instants and durations; every duration in the
/// system is an exact integer nanosecond count. Addition and subtraction
/// are checked and throw SimulationError on overflow or on a negative
/// result, so time arithmetic is exact: (a - b) + b == a whenever a >= b.
class SimTime {
    std::int64_t ns_ = 0;

public:
    constexpr SimTime() = default;

    static constexpr SimTime from_ns(std::int64_t ns) {
        if (ns < 0) throw SimulationError("SimTime: negative value");
        SimTime t;
        t.ns_ = ns;
        return t;
    }
    static constexpr SimTime from_us(std::int64_t us) { return from_ns(us * 1000); }
    static constexpr SimTime from_ms(std::int64_t ms) { return from_ns(ms * 1000000); }
    static constexpr SimTime from_s(std::int64_t s) { return from_ns(s * 1000000000); }
    static constexpr SimTime zero() { return SimTime{}; }

    [[nodiscard]] constexpr std::int64_t ns() const { return ns_; }
    [[nodiscard]] constexpr double us() const { return static_cast<double>(ns_) * 1e-3; }
    [[nodiscard]] constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }

    constexpr SimTime operator+(SimTime rhs) const {
        std::int64_t out = 0;
        if (__builtin_add_overflow(ns_, rhs.ns_, &out))
            throw SimulationError("SimTime: addition overflow");
        return from_ns(out);
    }
    constexpr SimTime operator-(SimTime rhs) const {
        if (rhs.ns_ > ns_) throw SimulationError("SimTime: negative difference");
        return from_ns(ns_ - rhs.ns_);
    }
    constexpr SimTime& operator+=(SimTime rhs) { return *this = *this + rhs; }
    constexpr SimTime& operator-=(SimTime rhs) { return *this = *this - rhs; }

    /// Scale a duration by an integer count (checked).
    constexpr SimTime operator*(std::int64_t k) const {
        std::int64_t out = 0;
        if (k < 0 || __builtin_mul_overflow(ns_, k, &out))
            throw SimulationError("SimTime: multiplication overflow");
        return from_ns(out);
    }

    /// How many whole periods of @p period fit before this instant.
    [[nodiscard]] constexpr std::int64_t div(SimTime period) const {
        if (period.ns_ <= 0) throw SimulationError("SimTime: division by zero period");
        return ns_ / period.ns_;
    }

    constexpr auto operator<=>(const SimTime&) const = default;
};

using int128 = __int128;

/// @brief Transmission time of @p n bytes at @p rate_bps, rounded up to
/// whole nanoseconds. Monotone in n.
inline SimTime bytes_to_duration(std::int64_t n_bytes, std::int64_t rate_bps) {
    if (rate_bps <= 0) throw ConfigError("bytes_to_duration: rate must be positive");
    if (n_bytes < 0) throw ConfigError("bytes_to_duration: negative byte count");
    const int128 bits_scaled = int128(n_bytes) * 8 * 1000000000;
    const int128 ns = (bits_scaled + rate_bps - 1) / rate_bps;
    if (ns > std::numeric_limits<std::int64_t>::max())
        throw ConfigError("bytes_to_duration: overflow");
    return SimTime::from_ns(static_cast<std::int64_t>(ns));
}

/// @brief How many whole bytes fit into @p d at @p rate_bps (floor).
inline std::int64_t duration_to_bytes(SimTime d, std::int64_t rate_bps) {
    if (rate_bps <= 0) throw ConfigError("duration_to_bytes: rate must be positive");
    const int128 bytes = int128(d.ns()) * rate_bps / (int128(8) * 1000000000);
    if (bytes > std::numeric_limits<std::int64_t>::max())
        throw ConfigError("duration_to_bytes: overflow");
    return static_cast<std::int64_t>(bytes);
}

/// Parse a time literal with unit suffix: "100ns", "0.1us", "1ms", "10s".
/// Accepted units: ns, us, ms, s. Decimal values are rounded to the
/// nearest nanosecond.
inline SimTime parse_time(std::string_view text) {
    size_t pos = 0;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
            text[pos] == '+'))
        ++pos;
    if (pos == 0) throw ConfigError("parse_time: no number in '" + std::string(text) + "'");
    const std::string num(text.substr(0, pos));
    std::string_view unit = text.substr(pos);
    double factor = 0.0;
    if (unit == "ns") factor = 1.0;
    else if (unit == "us") factor = 1e3;
    else if (unit == "ms") factor = 1e6;
    else if (unit == "s") factor = 1e9;
    else throw ConfigError("parse_time: unknown unit in '" + std::string(text) + "'");
    double value = 0.0;
    try {
        value = std::stod(num);
    } catch (const std::exception&) {
        throw ConfigError("parse_time: bad number in '" + std::string(text) + "'");
    }
    const double ns = value * factor;
    if (ns < 0 || ns > 9.2e18) throw ConfigError("parse_time: out of range '" + std::string(text) + "'");
    return SimTime::from_ns(static_cast<std::int64_t>(ns + 0.5));
}

/// Render a time in the shortest exact unit ("1ms", "100ns", "10s").
inline std::string format_time(SimTime t) {
    const std::int64_t ns = t.ns();
    if (ns % 1000000000 == 0) return std::to_string(ns / 1000000000) + "s";
    if (ns % 1000000 == 0) return std::to_string(ns / 1000000) + "ms";
    if (ns % 1000 == 0) return std::to_string(ns / 1000) + "us";
    return std::to_string(ns) + "ns";
}

} // namespace eposim
