#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ellipsis {

/// Bounded kaudit backlog drained in periodic bursts by the audit daemon.
struct BufferConfig {
    std::uint64_t capacity = 50'000;  // events
    std::uint64_t drain_period_ns = 1'000'000;
    std::uint64_t drain_burst = 4;  // events removed per drain tick
    std::uint64_t drain_jitter_ns = 0;  // tick k fires at k*period + U[0, jitter], counted from the first arrival
    std::uint64_t seed = 1;

    /// Throws InvariantViolation for zero capacity, period or burst.
    void validate() const;
};

struct SimResult {
    std::uint64_t offered = 0;
    std::uint64_t delivered = 0;
    std::uint64_t lost_events = 0;
    std::uint64_t max_occupancy = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> occupancy_samples;  // (t_ns, events)
};

/// Replays sorted arrival times against the buffer. A drain tick and an
/// arrival at the same instant drain first. Occupancy is sampled every
/// `sample_period_ns` (0 disables sampling) up to the last arrival; whatever
/// is still queued then is eventually delivered.
SimResult simulate(std::span<const std::uint64_t> arrivals_ns, const BufferConfig& config,
                   std::uint64_t sample_period_ns = 0);

/// Smallest capacity with no loss for these arrivals and drain settings
/// (the capacity field of `drain` is ignored). Empty input gives 1.
std::uint64_t min_capacity_for_lossless(std::span<const std::uint64_t> arrivals_ns, const BufferConfig& drain);

}  // namespace ellipsis
