#pragma once

#include <cstddef>

namespace ecsrep {

struct LinkParams {
    double alpha_sq = 0.1; // |alpha|^2 of each local cat
    double tap = 0.1;      // sin^2(theta) sent toward the central station
    double L0_km = 100.0;  // elementary link length
    double L_att_km = 22.0;
    double eta_d = 0.9; // detector efficiency
    double eta_m = 1.0; // memory retrieval efficiency
    double c_km_s = 2.0e5;

    double eta() const { return eta_d * eta_m; }
    void validate() const; // throws std::invalid_argument
};

struct Normalizations {
    double n_plus = 0, n_minus = 0;             // 2(1 +- e^{-2|a|^2})
    double m_plus = 0, m_minus = 0;             // 2(1 +- e^{-4|a|^2})
    double m_plus_theta = 0, m_minus_theta = 0; // 2(1 +- e^{-4|a|^2 cos^2 t})
    static Normalizations from(const LinkParams& p);
};

// Two-weight mixture over the odd (-) and even (+) entangled sectors.
struct MixedLinkState {
    double f_minus = 1.0;
    double f_plus = 0.0;
    int level = 0;
    void validate() const;
};

enum class Parity { odd, even };

// Which detector counts a swap station accepts as success. The odd-only set
// excludes the empty outcome and all even counts; that exclusion is applied
// identically at nesting level 2.
enum class AcceptanceSet { odd_only, all_counts };

// total-time bookkeeping: bare formula (9/4) T0/(P1 P2 Pps), or the same with
// the extra 3/2 for waiting on the slower of the two chains postselection pairs
enum class ChainAccounting { paired_chains, bare_formula };

enum class PurificationForm { standard, as_printed };

struct SwapOutcome {
    Parity parity = Parity::odd;
    double p_success = 0;
    MixedLinkState state_after;
    double fidelity = 0; // dominant-sector weight: F- for odd, G+ for even
};

struct RateReport {
    double t0_seconds = 0;
    double p0 = 0, p1 = 0, p2 = 0, p_ps = 0;
    double f_link = 0, f_swap1 = 0, f_swap2 = 0, f_postselected = 0;
    double total_seconds = 0;
};

double eta_t(double L0_km, double L_att_km);
double eta_t(const LinkParams& p);

double link_success_probability(const LinkParams& p);
double link_fidelity(const LinkParams& p);
double link_time(const LinkParams& p);

double swap_numerator(const MixedLinkState& in, const LinkParams& p, Parity parity);
double swap_denominator(const MixedLinkState& in, const LinkParams& p, Parity parity);
double swap_numerator_odd(const MixedLinkState& in, const LinkParams& p);
double swap_denominator_odd(const MixedLinkState& in, const LinkParams& p);
double swap_fidelity(const MixedLinkState& in, const LinkParams& p, Parity parity);
SwapOutcome swap_outcome(const MixedLinkState& in, const LinkParams& p, Parity parity);

// Probability of the station counting exactly n photons (n >= 1, parity of n
// must match `parity`).
double swap_probability_n(const MixedLinkState& in, const LinkParams& p,
                          unsigned n, Parity parity);
double swap_success_probability(const MixedLinkState& in, const LinkParams& p,
                                AcceptanceSet set = AcceptanceSet::odd_only);

// Leading-order acceptance probability (eta^2/2) (F-^2)^2 of the final
// two-chain postselection.
double postselection_probability(double f_minus_2, const LinkParams& p);

// Exact two-chain postselection statistics. Acceptance needs exactly one
// photon per end node, so only the {0,1}x{0,1} corner of each chain's post-loss
// state contributes; that corner is evaluated in closed form per loss branch.
struct PostselectionStats {
    double p_accept = 0;
    double fidelity = 0; // against (|1001> + |0110>)/sqrt(2) across the chains
};
PostselectionStats postselected_corner(double f_minus, double amp_sq, double eta);

// Documented approximation: vacuum components dropped by the postselection,
// one- and up-to-three-photon chain contents retained at lowest loss order.
double postselected_fidelity_leading_order(double f_minus, double amp_sq,
                                           double eta);

RateReport chain_time_four_links(
    const LinkParams& p, ChainAccounting accounting = ChainAccounting::paired_chains);

double purification_map(double f_in,
                        PurificationForm form = PurificationForm::standard);

double direct_transmission_time(double L_km, double source_rate_hz,
                                double L_att_km = 22.0);

} // namespace ecsrep
