#include <catch2/catch.hpp>

#include <map>

#include "eposim/traffic.hpp"

using namespace eposim;

TEST_CASE("mean_interarrival examples") {
    SizeDistribution single{{{1500, 1.0}}};
    CHECK(mean_interarrival(1e6, single).ns() == 12000000); // 12 ms

    SizeDistribution two{{{40, 0.5}, {1500, 0.5}}}; // E[size] = 770 B = 6160 bits
    CHECK(mean_interarrival(6.16e6, two).ns() == 1000000); // 1 ms
}

TEST_CASE("rate 0 yields a source that never fires") {
    TrafficSource src(0, ServiceClass::BE, 0.0, SizeDistribution::default_trimodal(), 1);
    CHECK(src.exhausted());
}

TEST_CASE("fixed seed replays an identical packet sequence") {
    const auto dist = SizeDistribution::default_trimodal();
    TrafficSource a(3, ServiceClass::HP, 5e6, dist, 12345);
    TrafficSource b(3, ServiceClass::HP, 5e6, dist, 12345);
    for (int i = 0; i < 200; ++i) {
        const Packet pa = a.emit(i);
        const Packet pb = b.emit(i);
        CHECK(pa.arrival == pb.arrival);
        CHECK(pa.size_bytes == pb.size_bytes);
    }
}

TEST_CASE("changing the seed changes the sequence") {
    const auto dist = SizeDistribution::default_trimodal();
    TrafficSource a(3, ServiceClass::HP, 5e6, dist, 1);
    TrafficSource b(3, ServiceClass::HP, 5e6, dist, 2);
    bool any_diff = false;
    for (int i = 0; i < 50; ++i)
        if (a.emit(i).arrival != b.emit(i).arrival) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("substreams depend only on (seed, onu, class)") {
    CHECK(derive_stream_seed(9, 3, 0) == derive_stream_seed(9, 3, 0));
    CHECK(derive_stream_seed(9, 3, 0) != derive_stream_seed(9, 4, 0));
    CHECK(derive_stream_seed(9, 3, 0) != derive_stream_seed(9, 3, 1));
    CHECK(derive_stream_seed(9, 3, 0) != derive_stream_seed(10, 3, 0));
}

TEST_CASE("arrival times are strictly increasing") {
    // Very high rate forces sub-ns exponential gaps, exercising the 1 ns clamp.
    SizeDistribution small{{{40, 1.0}}};
    TrafficSource src(0, ServiceClass::BE, 5e11, small, 7);
    SimTime prev = SimTime::zero();
    for (int i = 0; i < 5000; ++i) {
        const Packet p = src.emit(i);
        CHECK(p.arrival > prev);
        prev = p.arrival;
    }
}

TEST_CASE("empirical interarrival mean within 3% at 1e5 samples") {
    const auto dist = SizeDistribution::default_trimodal();
    const double rate = 20e6;
    TrafficSource src(1, ServiceClass::BE, rate, dist, 424242);
    const int n = 100000;
    SimTime last = SimTime::zero();
    for (int i = 0; i < n; ++i) last = src.emit(i).arrival;
    const double mean_gap = static_cast<double>(last.ns()) / n;
    const double expected = static_cast<double>(mean_interarrival(rate, dist).ns());
    CHECK(mean_gap == Approx(expected).epsilon(0.03));
}

TEST_CASE("empirical size frequencies within 2% absolute at 1e5 samples") {
    const auto dist = SizeDistribution::default_trimodal();
    TrafficSource src(2, ServiceClass::BE, 50e6, dist, 777);
    std::map<std::uint32_t, int> hist;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hist[src.emit(i).size_bytes] += 1;
    CHECK(std::abs(hist[40] / double(n) - 0.4) < 0.02);
    CHECK(std::abs(hist[552] / double(n) - 0.3) < 0.02);
    CHECK(std::abs(hist[1500] / double(n) - 0.3) < 0.02);
}

TEST_CASE("long-run offered bit-rate converges to rate_bps") {
    const auto dist = SizeDistribution::default_trimodal();
    const double rate = 15e6;
    TrafficSource src(0, ServiceClass::BE, rate, dist, 31337);
    const int n = 100000;
    std::int64_t bytes = 0;
    SimTime last = SimTime::zero();
    for (int i = 0; i < n; ++i) {
        const Packet p = src.emit(i);
        bytes += p.size_bytes;
        last = p.arrival;
    }
    const double measured_bps = double(bytes) * 8.0 / last.seconds();
    CHECK(measured_bps == Approx(rate).epsilon(0.03));
}
