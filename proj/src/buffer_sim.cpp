#include "ellipsis/buffer_sim.hpp"

#include <algorithm>
#include <random>

#include "ellipsis/errors.hpp"

namespace ellipsis {

void BufferConfig::validate() const {
    if (capacity < 1) throw InvariantViolation("buffer capacity must be >= 1");
    if (drain_period_ns < 1) throw InvariantViolation("drain period must be >= 1 ns");
    if (drain_burst < 1) throw InvariantViolation("drain burst must be >= 1");
}

namespace {

class DrainSchedule {
public:
    DrainSchedule(const BufferConfig& cfg, std::uint64_t first_tick)
        : cfg_(cfg), rng_(cfg.seed), tick_(first_tick / cfg.drain_period_ns) {
        advance();
    }

    std::uint64_t next() const noexcept { return next_; }

    void advance() {
        ++tick_;
        std::uint64_t t = tick_ * cfg_.drain_period_ns;
        if (cfg_.drain_jitter_ns > 0) {
            std::uniform_int_distribution<std::uint64_t> jitter(0, cfg_.drain_jitter_ns);
            t += jitter(rng_);
        }
        // Large jitter must not reorder ticks.
        next_ = std::max(t, next_);
    }

private:
    const BufferConfig& cfg_;
    std::mt19937_64 rng_;
    std::uint64_t tick_ = 0;
    std::uint64_t next_ = 0;
};

}  // namespace

SimResult simulate(std::span<const std::uint64_t> arrivals_ns, const BufferConfig& config,
                   std::uint64_t sample_period_ns) {
    config.validate();
    if (!std::is_sorted(arrivals_ns.begin(), arrivals_ns.end())) {
        throw InvariantViolation("arrivals must be sorted by time");
    }
    SimResult result;
    result.offered = arrivals_ns.size();
    // Start both clocks at the period boundary just before the first arrival,
    // so epoch-based timestamps do not replay decades of idle ticks.
    const std::uint64_t start = arrivals_ns.empty() ? 0 : arrivals_ns.front();
    DrainSchedule drain(config, start);
    std::uint64_t occupancy = 0;
    std::uint64_t next_sample = sample_period_ns > 0 ? start - start % sample_period_ns : 0;

    auto sample_until = [&](std::uint64_t t) {
        // Samples strictly before t see the state prior to the event at t.
        while (sample_period_ns > 0 && next_sample < t) {
            result.occupancy_samples.emplace_back(next_sample, occupancy);
            next_sample += sample_period_ns;
        }
    };
    auto drain_until = [&](std::uint64_t t) {
        while (drain.next() <= t) {
            sample_until(drain.next());
            occupancy -= std::min(occupancy, config.drain_burst);
            drain.advance();
        }
    };

    for (auto t : arrivals_ns) {
        drain_until(t);
        sample_until(t);
        if (occupancy >= config.capacity) {
            ++result.lost_events;
        } else {
            ++occupancy;
            result.max_occupancy = std::max(result.max_occupancy, occupancy);
        }
    }
    if (!arrivals_ns.empty()) sample_until(arrivals_ns.back() + 1);
    result.delivered = result.offered - result.lost_events;
    return result;
}

std::uint64_t min_capacity_for_lossless(std::span<const std::uint64_t> arrivals_ns, const BufferConfig& drain) {
    if (arrivals_ns.empty()) return 1;
    BufferConfig cfg = drain;
    // With capacity == offered nothing can be lost, and loss is monotone in
    // capacity, so binary search the boundary.
    std::uint64_t lo = 1;
    std::uint64_t hi = arrivals_ns.size();
    while (lo < hi) {
        const auto mid = lo + (hi - lo) / 2;
        cfg.capacity = mid;
        if (simulate(arrivals_ns, cfg).lost_events == 0) hi = mid;
        else lo = mid + 1;
    }
    return lo;
}

}  // namespace ellipsis
