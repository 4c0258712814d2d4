#include <doctest.h>

#include <random>

#include "ellipsis/buffer_sim.hpp"
#include "ellipsis/errors.hpp"

using namespace ellipsis;

namespace {

// `per_second` evenly spaced arrivals for `seconds`.
std::vector<std::uint64_t> steady(std::uint64_t per_second, std::uint64_t seconds, std::uint64_t offset = 0) {
    std::vector<std::uint64_t> out;
    const std::uint64_t gap = 1'000'000'000 / per_second;
    for (std::uint64_t i = 0; i < per_second * seconds; ++i) out.push_back(offset + i * gap);
    return out;
}

}  // namespace

TEST_CASE("arrivals below drain throughput lose nothing") {
    // Any capacity that holds one drain period's worth of arrivals.
    const auto a = steady(3000, 5);
    for (std::uint64_t cap : {4u, 10u, 50000u}) {
        BufferConfig cfg;
        cfg.capacity = cap;
        const auto r = simulate(a, cfg);
        CHECK(r.lost_events == 0);
        CHECK(r.delivered == a.size());
    }
}

TEST_CASE("overload loses the excess beyond capacity") {
    // 400 Hz x 14 events against 4 events per millisecond.
    const auto a = steady(5600, 250);
    BufferConfig cfg;
    const auto r = simulate(a, cfg);
    CHECK(r.offered == 1'400'000);
    const double expected = (5600.0 - 4000.0) * 250 - 50'000;
    CHECK(static_cast<double>(r.lost_events) == doctest::Approx(expected).epsilon(0.01));
    CHECK(r.max_occupancy == 50'000);
    CHECK(r.delivered + r.lost_events == r.offered);
}

TEST_CASE("reduced stream stays lossless and small") {
    const auto a = steady(400, 250);
    BufferConfig cfg;
    const auto r = simulate(a, cfg, 1'000'000'000);
    CHECK(r.lost_events == 0);
    CHECK(r.max_occupancy <= 1000);
    CHECK(r.occupancy_samples.size() == 250);
    CHECK(r.occupancy_samples[1].first == 1'000'000'000);
}

TEST_CASE("minimum lossless capacity") {
    BufferConfig drain;
    std::vector<std::uint64_t> matched;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        for (int j = 0; j < 4; ++j) matched.push_back(k * 1'000'000 + 500'000 + j);
    }
    CHECK(min_capacity_for_lossless(matched, drain) == 4);
    CHECK(min_capacity_for_lossless(std::vector<std::uint64_t>{}, drain) == 1);

    const auto raw = steady(5600, 2);
    const auto reduced = steady(400, 2);
    CHECK(min_capacity_for_lossless(reduced, drain) < min_capacity_for_lossless(raw, drain));

    BufferConfig at_min = drain;
    at_min.capacity = min_capacity_for_lossless(raw, drain);
    CHECK(simulate(raw, at_min).lost_events == 0);
    at_min.capacity -= 1;
    CHECK(simulate(raw, at_min).lost_events > 0);
}

TEST_CASE("loss is monotone in capacity and burst") {
    std::mt19937_64 rng(9);
    std::vector<std::uint64_t> a;
    std::uint64_t t = 0;
    for (int i = 0; i < 20000; ++i) {
        t += rng() % 400'000;
        a.push_back(t);
    }
    BufferConfig cfg;
    cfg.drain_jitter_ns = 300'000;
    std::uint64_t prev = UINT64_MAX;
    for (std::uint64_t cap : {1u, 5u, 20u, 100u, 1000u}) {
        cfg.capacity = cap;
        const auto lost = simulate(a, cfg).lost_events;
        CHECK(lost <= prev);
        prev = lost;
    }
    cfg.capacity = 20;
    prev = UINT64_MAX;
    for (std::uint64_t burst : {1u, 2u, 4u, 8u}) {
        cfg.drain_burst = burst;
        const auto lost = simulate(a, cfg).lost_events;
        CHECK(lost <= prev);
        prev = lost;
    }
}

TEST_CASE("max occupancy grows with offered load") {
    BufferConfig cfg;
    std::uint64_t prev = 0;
    for (std::uint64_t rate : {1000u, 3000u, 4500u, 6000u}) {
        const auto occ = simulate(steady(rate, 3), cfg).max_occupancy;
        CHECK(occ >= prev);
        prev = occ;
    }
}

TEST_CASE("jittered runs are reproducible") {
    const auto a = steady(4500, 3);
    BufferConfig cfg;
    cfg.capacity = 300;
    cfg.drain_jitter_ns = 700'000;
    cfg.seed = 42;
    const auto x = simulate(a, cfg, 10'000'000);
    const auto y = simulate(a, cfg, 10'000'000);
    CHECK(x.lost_events == y.lost_events);
    CHECK(x.max_occupancy == y.max_occupancy);
    CHECK(x.occupancy_samples == y.occupancy_samples);
    CHECK(x.delivered + x.lost_events == x.offered);
}

TEST_CASE("drain ticks run before arrivals at the same instant") {
    BufferConfig cfg;
    cfg.capacity = 1;
    cfg.drain_burst = 1;
    // Arrivals exactly on the ticks: each tick empties the slot first.
    std::vector<std::uint64_t> a;
    for (std::uint64_t k = 1; k <= 10; ++k) a.push_back(k * cfg.drain_period_ns);
    CHECK(simulate(a, cfg).lost_events == 0);
}

TEST_CASE("invalid configuration") {
    BufferConfig cfg;
    cfg.capacity = 0;
    CHECK_THROWS_AS(cfg.validate(), InvariantViolation);
    cfg = {};
    cfg.drain_burst = 0;
    CHECK_THROWS_AS(simulate(std::vector<std::uint64_t>{1}, cfg), InvariantViolation);
    cfg = {};
    cfg.drain_period_ns = 0;
    CHECK_THROWS_AS(cfg.validate(), InvariantViolation);
}

TEST_CASE("epoch timestamps behave like the same arrivals near zero") {
    const std::uint64_t epoch = 1'601'405'431'000'000'000ULL;
    const auto near_zero = steady(5000, 1);
    std::vector<std::uint64_t> shifted;
    for (auto t : near_zero) shifted.push_back(epoch + t);
    BufferConfig cfg;
    cfg.capacity = 200;
    const auto a = simulate(near_zero, cfg, 100'000'000);
    const auto b = simulate(shifted, cfg, 100'000'000);
    CHECK(a.lost_events == b.lost_events);
    CHECK(a.max_occupancy == b.max_occupancy);
    REQUIRE(b.occupancy_samples.size() == a.occupancy_samples.size());
    CHECK(b.occupancy_samples.front().first == epoch);
    CHECK(min_capacity_for_lossless(shifted, cfg) == min_capacity_for_lossless(near_zero, cfg));
}
