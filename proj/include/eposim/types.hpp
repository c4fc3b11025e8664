#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "eposim/time.hpp"

namespace eposim {

/// Two service classes, total order HP > BE. Kept as an enum so a later
/// multi-class extension only has to widen this type.
enum class ServiceClass : std::uint8_t { HP = 0, BE = 1 };

constexpr std::string_view to_string(ServiceClass c) {
    return c == ServiceClass::HP ? "hp" : "be";
}

using OnuId = std::uint32_t;
using PacketId = std::uint64_t;

/// @brief One queued/transmitted unit.
///
/// `klass` is the class the packet was generated with; `effective_class`
/// is the class after reordering: demotion rewrites it to BE at admission,
/// promotion rewrites it to HP when a BE packet rides a steady slot.
/// A packet is never fragmented; it occupies one contiguous interval.
struct Packet {
    PacketId id = 0;
    OnuId onu = 0;
    ServiceClass klass = ServiceClass::BE;
    ServiceClass effective_class = ServiceClass::BE;
    bool demoted = false;
    std::uint32_t size_bytes = 0;
    SimTime arrival;
    std::optional<SimTime> departure; ///< completion of reception at the OLT
};

} // namespace eposim
