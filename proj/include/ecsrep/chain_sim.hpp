#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ecsrep/analytic.hpp"
#include "ecsrep/rng.hpp"

namespace ecsrep {

// Whether station attempts consume extra wall time for classical signalling
// (one link span at the first nesting level, two at the second, the full span
// for the final acceptance round).
enum class SwapCost { free_swaps, communication };

// How the two chains feeding the final acceptance are scheduled: freshly
// grown side by side (wait for the slower one), or drawn from a steady supply
// so each round costs one chain-generation time.
enum class PairingMode { synchronized, amortized };

struct StageProbabilities {
    double p0 = 0.0;   // elementary generation
    double p1 = 0.0;   // first-level station
    double p2 = 0.0;   // second-level station (four-link chains only)
    double p_ps = 0.0; // final two-chain acceptance
};

struct ChainConfig {
    std::size_t n_links = 4; // 2 or 4
    LinkParams link;
    std::size_t n_trials = 10000;
    std::uint64_t rng_seed = 1;
    SwapCost swap_cost = SwapCost::free_swaps;
    PairingMode pairing = PairingMode::synchronized;
    bool postselection = true;
    // Overrides the analytically derived stage probabilities when set.
    std::optional<StageProbabilities> stages;
};

struct TrialRecord {
    double total_seconds = 0.0;
    // Elementary-link generation attempts along the time-critical path.
    std::uint64_t link_attempts = 0;
    std::uint64_t swap_retries = 0; // failed station events, all levels, both sides
    std::uint64_t postselection_retries = 0;
    MixedLinkState final_state; // delivered sector mixture at the top level
};

struct ChainReport {
    std::vector<TrialRecord> trials;
    double mean_seconds = 0.0;
    double stderr_seconds = 0.0;
    // Closed-form expectation under the same stage probabilities, free-swap
    // accounting, and the configured pairing mode.
    double analytic_seconds = 0.0;
    StageProbabilities stages;
    RateReport analytic; // per-stage closed-form reference
};

// Time (seconds) until one elementary link heralds, for one fresh pair of
// memories; consumes one geometric draw.
double sample_link_time(const LinkParams& p, PhiloxStream& rng);

ChainReport simulate_chain(const ChainConfig& cfg);

} // namespace ecsrep
