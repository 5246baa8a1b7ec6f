#pragma once

#include <string>
#include <vector>

#include "ecsrep/analytic.hpp"
#include "ecsrep/fock.hpp"

namespace ecsrep {

struct CircuitResult {
    std::string outcome_label;
    double probability = 0.0;
    // Attached for outcomes with probability above 1e-12 and few clicks;
    // high-count tails keep an empty operator but exact probabilities.
    DensityOperator conditional_state;
    double fidelity_vs_target = 0.0; // against the parity-appropriate target
};

// Full-circuit simulation of one entanglement-creation attempt: odd cats on
// both memories, tap beamsplitters, fiber loss to the middle, 50/50 combining,
// inefficient number-resolved detection on both central ports. Outcomes are
// grouped by total click count; the two one-click ports are one relabeled
// class. Caps |alpha|^2 at 4 (truncation policy).
std::vector<CircuitResult> elementary_link_circuit(const LinkParams& p);

struct SwapCountOutcome {
    unsigned total_count = 0;
    Parity parity = Parity::even;
    double probability = 0.0;
    double fidelity_vs_target = 0.0; // dominant-sector weight for this count
    MixedLinkState state_after;
};

// Swap station: materializes the two input mixtures at the stored amplitude
// alpha*cos(theta), applies retrieval and detection inefficiency to the two
// inner modes, combines them 50/50 and counts. Outcome n=0 is the silent
// (failure) event. Both input states must sit at the same nesting level.
std::vector<SwapCountOutcome> swap_circuit(const MixedLinkState& ab,
                                           const MixedLinkState& cd,
                                           const LinkParams& p);

// Two parallel chains measured for one photon at each end node. Returns the
// accepted outcome: its probability, the postselected corner state on the
// four {0,1} memory levels, and fidelity against (|1001> + |0110>)/sqrt(2).
// Small-amplitude regime only: |alpha|^2 <= 0.3.
CircuitResult postselection_circuit(const MixedLinkState& chain1,
                                    const MixedLinkState& chain2,
                                    const LinkParams& p);

struct OutcomeWeight {
    std::string label;
    double probability = 0.0;
};

// Exhaustive (clicks at node A, clicks at node C) class probabilities of the
// same network, for completeness checks.
std::vector<OutcomeWeight> postselection_pattern_classes(const MixedLinkState& chain1,
                                                         const MixedLinkState& chain2,
                                                         const LinkParams& p);

enum class QuasiBell { phi_minus, phi_plus, psi_minus, psi_plus };

FockVector quasi_bell_state(QuasiBell which, complex amplitude, std::size_t n_max);

// 50/50 combining plus parity-resolved counting. Labels: the four state
// names (pattern identifies that state) plus "ambiguous_silent".
std::vector<OutcomeWeight> quasi_bell_discriminator(QuasiBell input, double alpha_sq,
                                                    double eta_d);

// ---------------------------------------------------------------------------

struct VerifyCheck {
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass() const;
};

struct VerifyOptions {
    std::vector<double> alpha_grid{0.1, 0.5, 1.0, 2.0};
    std::vector<double> tap_grid{0.01, 0.05, 0.1};
    // Closed forms drop terms of relative size eta_t*eta_d, so equivalence is
    // probed on a long link where that flux is ~1e-6.
    double probe_L0_km = 600.0;
    // Scales the analytic-side efficiency only; lets tests prove the pipeline
    // catches an injected fault.
    double analytic_eta_scale = 1.0;
};

VerifyReport run_verification(const LinkParams& base, const VerifyOptions& opts = {});

} // namespace ecsrep
