#include "ecsrep/analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace ecsrep {

void LinkParams::validate() const {
    if (!(alpha_sq > 0.0)) throw std::invalid_argument("LinkParams: alpha_sq must be > 0");
    if (!(tap > 0.0 && tap < 1.0)) throw std::invalid_argument("LinkParams: tap must be in (0,1)");
    if (!(L0_km > 0.0)) throw std::invalid_argument("LinkParams: degenerate link, L0 must be > 0");
    if (!(L_att_km > 0.0)) throw std::invalid_argument("LinkParams: L_att must be > 0");
    if (!(eta_d >= 0.0 && eta_d <= 1.0)) throw std::invalid_argument("LinkParams: eta_d must be in [0,1]");
    if (!(eta_m >= 0.0 && eta_m <= 1.0)) throw std::invalid_argument("LinkParams: eta_m must be in [0,1]");
    if (!(c_km_s > 0.0)) throw std::invalid_argument("LinkParams: c must be > 0");
}

void MixedLinkState::validate() const {
    if (!(f_minus >= 0.0 && f_plus >= 0.0))
        throw std::invalid_argument("MixedLinkState: negative sector weight");
    if (std::abs(f_minus + f_plus - 1.0) > 1e-9)
        throw std::invalid_argument("MixedLinkState: sector weights must sum to 1");
}

Normalizations Normalizations::from(const LinkParams& p) {
    Normalizations n;
    const double a2 = p.alpha_sq;
    const double cos_sq = 1.0 - p.tap;
    n.n_plus = 2.0 * (1.0 + std::exp(-2.0 * a2));
    n.n_minus = -2.0 * std::expm1(-2.0 * a2);
    n.m_plus = 2.0 * (1.0 + std::exp(-4.0 * a2));
    n.m_minus = -2.0 * std::expm1(-4.0 * a2);
    n.m_plus_theta = 2.0 * (1.0 + std::exp(-4.0 * a2 * cos_sq));
    n.m_minus_theta = -2.0 * std::expm1(-4.0 * a2 * cos_sq);
    return n;
}

double eta_t(double L0_km, double L_att_km) {
    if (!(L0_km >= 0.0 && L_att_km > 0.0))
        throw std::invalid_argument("eta_t: need L0 >= 0 and L_att > 0");
    return std::exp(-L0_km / (2.0 * L_att_km));
}

double eta_t(const LinkParams& p) {
    p.validate();
    return eta_t(p.L0_km, p.L_att_km);
}

double link_success_probability(const LinkParams& p) {
    p.validate();
    const Normalizations n = Normalizations::from(p);
    const double s = p.alpha_sq * p.tap;
    return 2.0 * (1.0 / (n.n_minus * n.n_minus)) * 2.0 * s * std::exp(-2.0 * s) *
           (n.m_minus_theta + 2.0 * n.m_plus_theta * s) * eta_t(p.L0_km, p.L_att_km) *
           p.eta_d;
}

double link_fidelity(const LinkParams& p) {
    p.validate();
    const Normalizations n = Normalizations::from(p);
    const double s = p.alpha_sq * p.tap;
    return n.m_minus_theta / (n.m_minus_theta + 2.0 * n.m_plus_theta * s);
}

double link_time(const LinkParams& p) {
    const double round = p.L0_km / p.c_km_s;
    const double l_exp = p.L0_km / (2.0 * p.L_att_km);
    if (l_exp > 50.0) {
        // long links: assemble T0 in log space so eta_t cannot underflow first
        const Normalizations n = Normalizations::from(p);
        const double s = p.alpha_sq * p.tap;
        const double log_p0_rest =
            std::log(4.0 * s * (n.m_minus_theta + 2.0 * n.m_plus_theta * s) * p.eta_d /
                     (n.n_minus * n.n_minus)) -
            2.0 * s;
        return round * std::exp(l_exp - log_p0_rest);
    }
    return round / link_success_probability(p);
}

namespace {

struct SectorCoeffs {
    double f_a, f_b, r; // dominant weight, other weight, ratio for this parity
};

SectorCoeffs sector(const MixedLinkState& in, const LinkParams& p, Parity parity) {
    in.validate();
    const Normalizations n = Normalizations::from(p);
    const double r_odd = n.m_minus_theta / n.m_plus_theta;
    if (parity == Parity::odd) return {in.f_minus, in.f_plus, r_odd};
    return {in.f_plus, in.f_minus, 1.0 / r_odd};
}

double loss_argument(const LinkParams& p) {
    return 2.0 * (1.0 - p.eta()) * p.alpha_sq * (1.0 - p.tap);
}

} // namespace

double swap_numerator(const MixedLinkState& in, const LinkParams& p, Parity parity) {
    p.validate();
    const SectorCoeffs c = sector(in, p, parity);
    const double t = loss_argument(p);
    return (c.f_a * c.f_a + c.f_b * c.r * c.f_b * c.r) * std::cosh(t) +
           2.0 * c.f_a * c.f_b * c.r * std::sinh(t);
}

double swap_denominator(const MixedLinkState& in, const LinkParams& p, Parity parity) {
    p.validate();
    const SectorCoeffs c = sector(in, p, parity);
    const double t = loss_argument(p);
    return (c.f_a * c.f_a + 2.0 * c.f_a * c.f_b + c.f_b * c.r * c.f_b * c.r) *
               std::cosh(t) +
           (c.f_b * c.f_b + 2.0 * c.f_a * c.f_b + (c.f_a / c.r) * (c.f_a / c.r)) *
               c.r * std::sinh(t);
}

double swap_numerator_odd(const MixedLinkState& in, const LinkParams& p) {
    return swap_numerator(in, p, Parity::odd);
}

double swap_denominator_odd(const MixedLinkState& in, const LinkParams& p) {
    return swap_denominator(in, p, Parity::odd);
}

double swap_fidelity(const MixedLinkState& in, const LinkParams& p, Parity parity) {
    p.validate();
    const SectorCoeffs c = sector(in, p, parity);
    // N/D with cosh factored out; stable for arbitrarily large loss arguments.
    const double th = std::tanh(loss_argument(p));
    const double num = (c.f_a * c.f_a + c.f_b * c.r * c.f_b * c.r) +
                       2.0 * c.f_a * c.f_b * c.r * th;
    const double den =
        (c.f_a * c.f_a + 2.0 * c.f_a * c.f_b + c.f_b * c.r * c.f_b * c.r) +
        (c.f_b * c.f_b + 2.0 * c.f_a * c.f_b + (c.f_a / c.r) * (c.f_a / c.r)) * c.r * th;
    return num / den;
}

SwapOutcome swap_outcome(const MixedLinkState& in, const LinkParams& p, Parity parity) {
    SwapOutcome out;
    out.parity = parity;
    out.fidelity = swap_fidelity(in, p, parity);
    out.p_success = swap_success_probability(
        in, p, parity == Parity::odd ? AcceptanceSet::odd_only : AcceptanceSet::all_counts);
    if (parity == Parity::even)
        out.p_success -= swap_success_probability(in, p, AcceptanceSet::odd_only);
    out.state_after.level = in.level + 1;
    if (parity == Parity::odd) {
        out.state_after.f_minus = out.fidelity;
        out.state_after.f_plus = 1.0 - out.fidelity;
    } else {
        out.state_after.f_plus = out.fidelity;
        out.state_after.f_minus = 1.0 - out.fidelity;
    }
    return out;
}

double swap_probability_n(const MixedLinkState& in, const LinkParams& p, unsigned n,
                          Parity parity) {
    p.validate();
    if (n < 1) throw std::invalid_argument("swap_probability_n: n must be >= 1");
    if ((n % 2 == 1) != (parity == Parity::odd))
        throw std::invalid_argument("swap_probability_n: parity does not match n");
    const Normalizations norm = Normalizations::from(p);
    const double m = (parity == Parity::odd) ? norm.m_minus_theta : norm.m_plus_theta;
    const double x = 2.0 * p.alpha_sq * (1.0 - p.tap);
    const double d = swap_denominator(in, p, parity);
    // log-space Poisson factor keeps large n and large |alpha|^2 finite
    const double log_term = static_cast<double>(n) * std::log(p.eta() * x) -
                            std::lgamma(static_cast<double>(n) + 1.0) - x;
    return (2.0 / m) * std::exp(log_term) * d;
}

double swap_success_probability(const MixedLinkState& in, const LinkParams& p,
                                AcceptanceSet set) {
    p.validate();
    long double total = 0.0L;
    for (unsigned n = 1; n <= 600; ++n) {
        const bool odd = (n % 2 == 1);
        if (set == AcceptanceSet::odd_only && !odd) continue;
        const double term =
            swap_probability_n(in, p, n, odd ? Parity::odd : Parity::even);
        total += term;
        if (n > 4 && term < 1e-18 * static_cast<double>(total)) break;
    }
    return static_cast<double>(total);
}

double postselection_probability(double f_minus_2, const LinkParams& p) {
    p.validate();
    if (!(f_minus_2 >= 0.0 && f_minus_2 <= 1.0))
        throw std::invalid_argument("postselection_probability: fidelity outside [0,1]");
    const double eta = p.eta();
    return 0.5 * eta * eta * f_minus_2 * f_minus_2;
}

// ---------------------------------------------------------------------------
// Two-chain postselection, evaluated on the one-photon corner.

namespace {

// 4x4 corner <m n| rho |m' n'> (m, n in {0,1}) of one chain's two-memory state
// F- phi- + F+ phi+ at amplitude beta, after retrieval/detection loss eta on
// both modes. Exact: every loss branch (l1, l2) is summed in closed form.
struct Corner {
    // index 2*m + n
    std::array<std::array<double, 4>, 4> m{};
};

Corner corner_state(double f_minus, double amp_sq, double eta) {
    const double beta_sq = amp_sq;
    // cross overlap of the two-mode branches is e^{-4 beta^2}
    const double m_minus = -2.0 * std::expm1(-4.0 * beta_sq);
    const double m_plus = 2.0 * (1.0 + std::exp(-4.0 * beta_sq));

    // phi_pm amplitude on |x, y>, with the e^{-beta^2}/sqrt(M) prefactor kept
    // outside the branch sums: amp(x, y) = beta^(x+y) (1 +- (-1)^(x+y)) /
    // sqrt(x! y!).
    const double beta = std::sqrt(beta_sq);
    auto with_sector = [&](int sign) {
        const double norm =
            std::exp(-beta_sq) / std::sqrt(sign > 0 ? m_plus : m_minus);
        return [=](unsigned x, unsigned y) -> double {
            const int parity = ((x + y) % 2 == 0) ? 1 : -1;
            if ((sign > 0 && parity < 0) || (sign < 0 && parity > 0)) return 0.0;
            double inv_root_fact = 1.0;
            for (unsigned k = 2; k <= x; ++k) inv_root_fact /= std::sqrt(double(k));
            for (unsigned k = 2; k <= y; ++k) inv_root_fact /= std::sqrt(double(k));
            return 2.0 * norm * std::pow(beta, double(x + y)) * inv_root_fact;
        };
    };

    Corner total;
    for (int sector_sign : {-1, +1}) {
        const double weight = sector_sign < 0 ? f_minus : 1.0 - f_minus;
        if (weight == 0.0) continue;
        auto amp = with_sector(sector_sign);

        // branch amplitude at corner entry (m,n) for loss multi-index (l1,l2):
        //   sqrt((1-eta)^l1 / l1!) sqrt((1-eta)^l2 / l2!) eta^((m+n)/2)
        //   sqrt((m+l1)!/m!) sqrt((n+l2)!/n!) amp(m+l1, n+l2)
        const unsigned l_cut = 48;
        Corner c;
        for (unsigned l1 = 0; l1 < l_cut; ++l1) {
            for (unsigned l2 = 0; l2 < l_cut; ++l2) {
                std::array<double, 4> a{};
                bool live = false;
                for (unsigned m = 0; m <= 1; ++m) {
                    for (unsigned n = 0; n <= 1; ++n) {
                        const double base = amp(m + l1, n + l2);
                        if (base == 0.0) continue;
                        double rising = 1.0; // sqrt((m+l1)!/m!) * sqrt((n+l2)!/n!)
                        for (unsigned k = m + 1; k <= m + l1; ++k)
                            rising *= std::sqrt(double(k));
                        for (unsigned k = n + 1; k <= n + l2; ++k)
                            rising *= std::sqrt(double(k));
                        double v = base * rising *
                                   std::pow(eta, 0.5 * double(m + n)) *
                                   std::pow(1.0 - eta, 0.5 * double(l1 + l2));
                        for (unsigned k = 2; k <= l1; ++k) v /= std::sqrt(double(k));
                        for (unsigned k = 2; k <= l2; ++k) v /= std::sqrt(double(k));
                        a[2 * m + n] = v;
                        live = live || v != 0.0;
                    }
                }
                if (!live) {
                    if (l1 + l2 > 8 && eta < 1.0) break;
                    continue;
                }
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j) c.m[i][j] += a[i] * a[j];
            }
            if (eta == 1.0 && l1 == 0) break; // no loss branches survive
        }
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) total.m[i][j] += weight * c.m[i][j];
    }
    return total;
}

} // namespace

PostselectionStats postselected_corner(double f_minus, double amp_sq, double eta) {
    if (!(f_minus >= 0.0 && f_minus <= 1.0))
        throw std::invalid_argument("postselected_corner: f_minus outside [0,1]");
    if (!(amp_sq > 0.0))
        throw std::invalid_argument("postselected_corner: amplitude must be positive");
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("postselected_corner: eta outside (0,1]");

    const Corner c = corner_state(f_minus, amp_sq, eta);
    // chain basis |mn>: 00 -> 0, 01 -> 1, 10 -> 2, 11 -> 3.
    // Accepted joint states (one photon at each end node):
    //   e1 = |10>_1 |01>_2, e2 = |01>_1 |10>_2, e3 = |11>_1 |00>_2,
    //   e4 = |00>_1 |11>_2; target = (e1 + e2)/sqrt(2).
    const int s1[4] = {2, 1, 3, 0};
    const int s2[4] = {1, 2, 0, 3};
    double acc[4][4];
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) acc[a][b] = c.m[s1[a]][s1[b]] * c.m[s2[a]][s2[b]];

    PostselectionStats out;
    out.p_accept = acc[0][0] + acc[1][1] + acc[2][2] + acc[3][3];
    if (out.p_accept > 0.0)
        out.fidelity =
            0.5 * (acc[0][0] + acc[1][1] + acc[0][1] + acc[1][0]) / out.p_accept;
    return out;
}

double postselected_fidelity_leading_order(double f_minus, double amp_sq,
                                           double eta) {
    const double beta_sq = amp_sq;
    const double m_minus = -2.0 * std::expm1(-4.0 * beta_sq);
    const double m_plus = 2.0 * (1.0 + std::exp(-4.0 * beta_sq));
    const double f_plus = 1.0 - f_minus;
    const double e = std::exp(-2.0 * beta_sq);
    auto q_odd = [&](int k) {
        double kfact = 1.0;
        for (int i = 2; i <= k; ++i) kfact *= i;
        return (4.0 * e / m_minus) * std::pow(2.0 * beta_sq, k) / kfact;
    };
    auto q_even = [&](int k) {
        double kfact = 1.0;
        for (int i = 2; i <= k; ++i) kfact *= i;
        return (4.0 * e / m_plus) * std::pow(2.0 * beta_sq, k) / kfact;
    };

    // One chain collapsing to a single photon: the stored photon survives, a
    // two-photon (+) component loses one, a three-photon (-) component loses
    // two. The one-loss (+) path lands in the good supermode as well.
    const double good = f_minus * q_odd(1) * eta +
                        f_plus * q_even(2) * 2.0 * eta * (1.0 - eta) +
                        f_minus * q_odd(3) * 3.0 * eta * (1.0 - eta) * (1.0 - eta);
    const double p_good = 0.5 * good * good;
    // Both photons of one chain at the two nodes (|11>) while the other chain
    // is empty: passes the one-per-node test but carries no entanglement.
    const double b11 = 0.5 * f_plus * q_even(2) * eta * eta +
                       1.5 * f_minus * q_odd(3) * eta * eta * (1.0 - eta);
    const double v00 = f_plus * q_even(0) + f_minus * q_odd(1) * (1.0 - eta);
    const double p_bad = 2.0 * b11 * v00;
    return p_good / (p_good + p_bad);
}

RateReport chain_time_four_links(const LinkParams& p, ChainAccounting accounting) {
    p.validate();
    RateReport r;
    r.p0 = link_success_probability(p);
    r.f_link = link_fidelity(p);
    r.t0_seconds = link_time(p);

    const MixedLinkState level0{r.f_link, 1.0 - r.f_link, 0};
    r.f_swap1 = swap_fidelity(level0, p, Parity::odd);
    r.p1 = swap_success_probability(level0, p, AcceptanceSet::odd_only);

    const MixedLinkState level1{r.f_swap1, 1.0 - r.f_swap1, 1};
    r.f_swap2 = swap_fidelity(level1, p, Parity::odd);
    r.p2 = swap_success_probability(level1, p, AcceptanceSet::odd_only);

    r.p_ps = postselection_probability(r.f_swap2, p);
    r.f_postselected =
        postselected_corner(r.f_swap2, p.alpha_sq * (1.0 - p.tap), p.eta()).fidelity;

    r.total_seconds = 2.25 * r.t0_seconds / (r.p1 * r.p2 * r.p_ps);
    if (accounting == ChainAccounting::paired_chains) r.total_seconds *= 1.5;
    return r;
}

double purification_map(double f_in, PurificationForm form) {
    if (!(f_in > 0.0 && f_in <= 1.0))
        throw std::invalid_argument("purification_map: fidelity outside (0,1]");
    if (form == PurificationForm::as_printed)
        return f_in * f_in / (f_in * f_in + (1.0 - f_in * f_in));
    return f_in * f_in / (f_in * f_in + (1.0 - f_in) * (1.0 - f_in));
}

double direct_transmission_time(double L_km, double source_rate_hz, double L_att_km) {
    if (!(L_km >= 0.0 && source_rate_hz > 0.0 && L_att_km > 0.0))
        throw std::invalid_argument("direct_transmission_time: invalid arguments");
    return std::exp(L_km / L_att_km) / source_rate_hz;
}

} // namespace ecsrep
