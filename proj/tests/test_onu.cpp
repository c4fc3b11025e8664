#include <catch2/catch.hpp>

#include <deque>

#include "eposim/onu.hpp"
#include "eposim/rng.hpp"

using namespace eposim;

namespace {

Packet mk(PacketId id, ServiceClass k, std::uint32_t size, std::int64_t arrival_ns = 0) {
    Packet p;
    p.id = id;
    p.klass = k;
    p.effective_class = k;
    p.size_bytes = size;
    p.arrival = SimTime::from_ns(arrival_ns);
    return p;
}

OnuMac make_onu(std::int64_t budget_bits, OnuMac::QueueMode mode = OnuMac::QueueMode::ClassQueues,
                std::int64_t capacity = 10000000, std::uint32_t lookahead = 8) {
    return OnuMac(0, mode, budget_bits, capacity, lookahead, 10.0);
}

/// Independent transcription of the packing rule, used as the oracle:
/// repeatedly scan positions 0..lookahead-1 of the remaining queue, take
/// the first fit, stop when a full scan fails.
std::vector<std::uint32_t> pack_oracle(std::vector<std::uint32_t> queue,
                                       std::int64_t budget, std::uint32_t lookahead) {
    std::vector<std::uint32_t> out;
    for (;;) {
        bool took = false;
        for (std::size_t i = 0; i < std::min<std::size_t>(queue.size(), lookahead); ++i) {
            if (queue[i] <= budget) {
                out.push_back(queue[i]);
                budget -= queue[i];
                queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(i));
                took = true;
                break;
            }
        }
        if (!took) return out;
    }
}

ClassQueue fill_queue(const std::vector<std::uint32_t>& sizes) {
    ClassQueue q;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        q.enqueue(mk(i + 1, ServiceClass::BE, sizes[i], std::int64_t(i)), 1LL << 40);
    return q;
}

std::vector<std::uint32_t> sizes_of(const std::vector<Packet>& v) {
    std::vector<std::uint32_t> s;
    for (const auto& p : v) s.push_back(p.size_bytes);
    return s;
}

} // namespace

TEST_CASE("admit: meter demotion at the subscription boundary") {
    // 12,500 B per window; 12,000 B already admitted this window.
    OnuMac onu = make_onu(12500 * 8);
    for (int i = 0; i < 8; ++i)
        CHECK(onu.admit(mk(i, ServiceClass::HP, 1500)).result == AdmitResult::Admitted);
    const AdmitOutcome out = onu.admit(mk(9, ServiceClass::HP, 552));
    CHECK(out.result == AdmitResult::Demoted);
    CHECK(out.demoted);
    CHECK(onu.be_queue().bytes() == 552);
    CHECK(onu.hp_queue().bytes() == 12000);
}

TEST_CASE("admit: BE passes through unchanged") {
    OnuMac onu = make_onu(100000);
    CHECK(onu.admit(mk(1, ServiceClass::BE, 552)).result == AdmitResult::Admitted);
    CHECK(onu.be_queue().bytes() == 552);
    CHECK(onu.hp_queue().bytes() == 0);
}

TEST_CASE("admit: in-profile HP charges the meter") {
    OnuMac onu = make_onu(100000);
    CHECK(onu.admit(mk(1, ServiceClass::HP, 1500)).result == AdmitResult::Admitted);
    CHECK(onu.meter().used_bits() == 1500 * 8);
    onu.start_window();
    CHECK(onu.meter().used_bits() == 0);
}

TEST_CASE("admit: drop-tail beyond queue capacity") {
    OnuMac onu = OnuMac(0, OnuMac::QueueMode::ClassQueues, 1LL << 40, 2000, 8, 10.0);
    CHECK(onu.admit(mk(1, ServiceClass::BE, 1500)).result == AdmitResult::Admitted);
    CHECK(onu.admit(mk(2, ServiceClass::BE, 1500)).result == AdmitResult::Dropped);
    CHECK(onu.be_queue().dropped_packets == 1);
    CHECK(onu.be_queue().dropped_bytes == 1500);
}

TEST_CASE("build_report: byte totals per class") {
    OnuMac onu = make_onu(1LL << 40);
    CHECK(onu.build_report(0).hp_bytes == 0);
    CHECK(onu.build_report(0).be_bytes == 0);

    onu.admit(mk(1, ServiceClass::HP, 40));
    onu.admit(mk(2, ServiceClass::HP, 1500));
    onu.admit(mk(3, ServiceClass::BE, 552));
    const GrantRequest r = onu.build_report(1);
    CHECK(r.hp_bytes == 1540);
    CHECK(r.be_bytes == 552);
}

TEST_CASE("build_report: demoted bytes count under be") {
    OnuMac onu = make_onu(320); // 40-byte budget
    onu.admit(mk(1, ServiceClass::HP, 40));
    onu.admit(mk(2, ServiceClass::HP, 40)); // over budget -> demoted
    const GrantRequest r = onu.build_report(0);
    CHECK(r.hp_bytes == 40);
    CHECK(r.be_bytes == 40);
}

TEST_CASE("pack_slot: spec examples") {
    {
        ClassQueue q = fill_queue({1500, 552, 40});
        const auto sel = pack_slot(q, 600, 3);
        CHECK(sizes_of(sel) == std::vector<std::uint32_t>{552, 40});
        CHECK(q.bytes() == 1500);
    }
    {
        ClassQueue q;
        CHECK(pack_slot(q, 600, 3).empty());
    }
    {
        ClassQueue q = fill_queue({1500, 552, 40});
        const auto sel = pack_slot(q, 5000, 3);
        CHECK(sizes_of(sel) == std::vector<std::uint32_t>{1500, 552, 40});
        CHECK(q.empty());
    }
    {
        ClassQueue q = fill_queue({1500, 552});
        CHECK(pack_slot(q, 600, 1).empty()); // head blocks at depth 1
        CHECK(q.bytes() == 2052);
    }
}

TEST_CASE("pack_slot matches the oracle on exhaustive small queues") {
    SplitMix64 rng(2024);
    const std::uint32_t sizes[] = {40, 552, 1500};
    for (int iter = 0; iter < 2000; ++iter) {
        const auto len = static_cast<std::size_t>(rng.next() % 9); // up to 8 packets
        std::vector<std::uint32_t> q;
        for (std::size_t i = 0; i < len; ++i) q.push_back(sizes[rng.next() % 3]);
        const auto budget = static_cast<std::int64_t>(rng.next() % 4000);
        const auto lookahead = static_cast<std::uint32_t>(1 + rng.next() % 8);

        ClassQueue cq = fill_queue(q);
        const auto got = sizes_of(pack_slot(cq, budget, lookahead));
        const auto want = pack_oracle(q, budget, lookahead);
        REQUIRE(got == want);

        std::int64_t total = 0;
        for (auto s : got) total += s;
        CHECK(total <= budget);
    }
}

TEST_CASE("pack_slot preserves the order of unselected packets") {
    ClassQueue q = fill_queue({1500, 40, 1500, 552, 1500});
    pack_slot(q, 600, 8); // removes 40 and 552
    REQUIRE(q.size() == 3);
    CHECK(q.at(0).id < q.at(1).id);
    CHECK(q.at(1).id < q.at(2).id);
}

TEST_CASE("pack_slot keeps FIFO order when nothing is skipped") {
    ClassQueue q = fill_queue({40, 40, 552, 40});
    const auto sel = pack_slot(q, 10000, 8);
    for (std::size_t i = 1; i < sel.size(); ++i) CHECK(sel[i - 1].id < sel[i].id);
}

TEST_CASE("fill_steady_slot: report reserved, HP first, BE promoted") {
    // Slot payload 936 B (1000-byte slot minus 64 B report, reserved upstream).
    OnuMac onu = make_onu(1LL << 40);
    onu.admit(mk(1, ServiceClass::HP, 400));
    onu.admit(mk(2, ServiceClass::BE, 552));
    onu.admit(mk(3, ServiceClass::BE, 40));
    const auto sent = onu.fill_steady_slot(936);
    // HP 400 first; residual 536 cannot fit the 552 B BE head, so the 40 B
    // packet within lookahead is promoted instead (952 > 936 would overflow).
    REQUIRE(sent.size() == 2);
    CHECK(sent[0].size_bytes == 400);
    CHECK(sent[0].klass == ServiceClass::HP);
    CHECK(sent[1].size_bytes == 40);
    CHECK(sent[1].effective_class == ServiceClass::HP); // promoted
    CHECK(sent[1].klass == ServiceClass::BE);
}

TEST_CASE("fill_steady_slot: empty HP queue still carries promoted BE") {
    OnuMac onu = make_onu(1LL << 40);
    onu.admit(mk(1, ServiceClass::BE, 552));
    const auto sent = onu.fill_steady_slot(2343);
    REQUIRE(sent.size() == 1);
    CHECK(sent[0].effective_class == ServiceClass::HP);
    CHECK(onu.counters.promoted_bytes == 552);
}

TEST_CASE("fill_steady_slot: both queues empty -> nothing but the report") {
    OnuMac onu = make_onu(1LL << 40);
    CHECK(onu.fill_steady_slot(2343).empty());
}

TEST_CASE("fill_steady_slot: demoted packets may ride but are not re-promoted") {
    OnuMac onu = make_onu(320); // one 40 B packet per window
    onu.admit(mk(1, ServiceClass::HP, 40));
    onu.admit(mk(2, ServiceClass::HP, 40)); // demoted
    const auto sent = onu.fill_steady_slot(2343);
    REQUIRE(sent.size() == 2);
    CHECK(sent[1].demoted);
    CHECK(sent[1].effective_class == ServiceClass::BE);
    CHECK(onu.counters.promoted_bytes == 0);
}

TEST_CASE("transmit_grant examples") {
    {
        OnuMac onu = make_onu(1LL << 40);
        for (int i = 0; i < 3; ++i) onu.admit(mk(i, ServiceClass::BE, 1500));
        CHECK(onu.transmit_grant(10000).size() == 3);
    }
    {
        OnuMac onu = make_onu(1LL << 40);
        onu.admit(mk(1, ServiceClass::BE, 1500));
        CHECK(onu.transmit_grant(0).empty());
    }
    {
        OnuMac onu = make_onu(1LL << 40);
        onu.admit(mk(1, ServiceClass::BE, 1500));
        onu.admit(mk(2, ServiceClass::BE, 1500));
        CHECK(onu.transmit_grant(1500).size() == 1);
    }
}

TEST_CASE("promotion never displaces HP") {
    SplitMix64 rng(5);
    const std::uint32_t sizes[] = {40, 552, 1500};
    for (int iter = 0; iter < 300; ++iter) {
        OnuMac onu = make_onu(1LL << 40);
        ClassQueue hp_copy;
        PacketId id = 1;
        for (int i = 0; i < 6; ++i) {
            const auto s = sizes[rng.next() % 3];
            onu.admit(mk(id, ServiceClass::HP, s, std::int64_t(id)));
            hp_copy.enqueue(mk(id, ServiceClass::HP, s, std::int64_t(id)), 1LL << 40);
            ++id;
        }
        for (int i = 0; i < 6; ++i)
            onu.admit(mk(id++, ServiceClass::BE, sizes[rng.next() % 3]));

        const std::int64_t budget = 40 + std::int64_t(rng.next() % 4000);
        const auto sent = onu.fill_steady_slot(budget);
        const auto hp_alone = pack_slot(hp_copy, budget, 8);

        std::vector<PacketId> hp_sent_ids;
        for (const auto& p : sent)
            if (p.klass == ServiceClass::HP) hp_sent_ids.push_back(p.id);
        std::vector<PacketId> expect;
        for (const auto& p : hp_alone) expect.push_back(p.id);
        CHECK(hp_sent_ids == expect);
    }
}

TEST_CASE("conservation: generated == transmitted + queued + dropped") {
    SplitMix64 rng(99);
    const std::uint32_t sizes[] = {40, 552, 1500};
    OnuMac onu = OnuMac(0, OnuMac::QueueMode::ClassQueues, 40000, 60000, 8, 10.0);
    PacketId id = 1;
    for (int round = 0; round < 50; ++round) {
        for (int i = 0; i < 20; ++i) {
            const auto k = rng.next() % 2 ? ServiceClass::HP : ServiceClass::BE;
            onu.admit(mk(id++, k, sizes[rng.next() % 3]));
        }
        onu.fill_steady_slot(2000);
        onu.transmit_grant(static_cast<std::int64_t>(rng.next() % 8000));
        onu.start_window();

        const auto& c = onu.counters;
        const std::int64_t gen = c.generated_bytes[0] + c.generated_bytes[1];
        const std::int64_t tx = c.transmitted_bytes[0] + c.transmitted_bytes[1];
        REQUIRE(gen == tx + onu.queued_bytes() + onu.dropped_bytes());
    }
}

TEST_CASE("policing soundness: window admissions never exceed the budget") {
    SplitMix64 rng(123);
    const std::uint32_t sizes[] = {40, 552, 1500};
    const std::int64_t budget_bits = 2343 * 8;
    OnuMac onu = make_onu(budget_bits);
    for (int window = 0; window < 100; ++window) {
        std::int64_t admitted = 0;
        for (int i = 0; i < 12; ++i) {
            const auto s = sizes[rng.next() % 3];
            if (onu.admit(mk(window * 100 + i, ServiceClass::HP, s)).result ==
                AdmitResult::Admitted)
                admitted += s;
        }
        REQUIRE(admitted * 8 <= budget_bits);
        onu.fill_steady_slot(2343);
        onu.start_window();
    }
}

TEST_CASE("single-fifo mode merges classes in arrival order") {
    OnuMac onu = make_onu(1LL << 40, OnuMac::QueueMode::SingleFifo);
    onu.admit(mk(1, ServiceClass::BE, 552, 10));
    onu.admit(mk(2, ServiceClass::HP, 40, 20));
    onu.admit(mk(3, ServiceClass::BE, 40, 30));
    const GrantRequest r = onu.build_report(0);
    CHECK(r.hp_bytes == 40);
    CHECK(r.be_bytes == 592);
    const auto sent = onu.transmit_mixed_slot(1000);
    REQUIRE(sent.size() == 3);
    CHECK(sent[0].id == 1); // arrival order, no class priority
    CHECK(sent[1].id == 2);
    CHECK(sent[2].id == 3);
}
