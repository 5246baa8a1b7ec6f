#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ecsrep/analytic.hpp"
#include "ecsrep/rng.hpp"

using namespace ecsrep;

namespace {

LinkParams params(double a2, double tap, double L0 = 100.0, double eta_d = 0.9,
                  double eta_m = 1.0) {
    LinkParams p;
    p.alpha_sq = a2;
    p.tap = tap;
    p.L0_km = L0;
    p.eta_d = eta_d;
    p.eta_m = eta_m;
    return p;
}

} // namespace

TEST_CASE("fiber transmission follows the attenuation law") {
    // reference: exp(-L0 / (2 * 22)) evaluated externally
    CHECK(eta_t(100.0, 22.0) == doctest::Approx(0.103030803462).epsilon(1e-10));
    CHECK(eta_t(150.0, 22.0) == doctest::Approx(0.0330712514883).epsilon(1e-10));
    CHECK(eta_t(600.0, 22.0) == doctest::Approx(1.19619647836e-06).epsilon(1e-10));
    // half-distance composition
    CHECK(eta_t(300.0, 22.0) == doctest::Approx(eta_t(150.0, 22.0) * eta_t(150.0, 22.0))
                                    .epsilon(1e-12));
}

TEST_CASE("link parameters are validated") {
    CHECK_THROWS_AS(params(-1.0, 0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.0, 0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.5, 0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.5, 1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.5, 0.1, -5.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.5, 0.1, 100.0, 1.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.5, 0.1, 100.0, 0.9, -0.1).validate(), std::invalid_argument);
    LinkParams bad_c = params(0.5, 0.1);
    bad_c.c_km_s = 0.0;
    CHECK_THROWS_AS(bad_c.validate(), std::invalid_argument);
    CHECK_NOTHROW(params(2.0, 0.025).validate());
}

TEST_CASE("mixture weights are validated") {
    CHECK_THROWS_AS((MixedLinkState{-0.1, 1.1, 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MixedLinkState{0.7, 0.5, 0}.validate()), std::invalid_argument);
    CHECK_NOTHROW((MixedLinkState{0.9, 0.1, 0}.validate()));
}

TEST_CASE("link operating point: 100 km, eta_d 0.9, drive 2, tapped 0.025") {
    // reference values from an independent implementation of the same model
    const LinkParams p = params(2.0, 0.025);
    CHECK(link_success_probability(p) == doctest::Approx(0.00957378062554).epsilon(1e-10));
    CHECK(link_fidelity(p) == doctest::Approx(0.909023161589).epsilon(1e-10));
    CHECK(link_time(p) == doctest::Approx(0.0522259721166).epsilon(1e-10));
}

TEST_CASE("link spot values at drive 0.5") {
    const LinkParams a = params(0.5, 0.05);
    CHECK(link_success_probability(a) == doctest::Approx(0.0100209236919).epsilon(1e-10));
    CHECK(link_fidelity(a) == doctest::Approx(0.936691475058).epsilon(1e-10));
    CHECK(link_time(a) == doctest::Approx(0.0498955999841).epsilon(1e-10));

    const LinkParams b = params(0.5, 0.1);
    CHECK(link_success_probability(b) == doctest::Approx(0.0199740582735).epsilon(1e-10));
    CHECK(link_fidelity(b) == doctest::Approx(0.877495698996).epsilon(1e-10));
    CHECK(link_time(b) == doctest::Approx(0.0250324692736).epsilon(1e-10));
}

TEST_CASE("link probability approaches the strong-drive form") {
    // at large drive the normalization factors saturate and
    // P0 -> s e^{-2s} (2 + 4 s) eta_t eta_d with s the tapped flux
    const LinkParams p = params(4.0, 0.0125);
    const double s = p.alpha_sq * p.tap;
    const double asym = s * std::exp(-2.0 * s) * (2.0 + 4.0 * s) * eta_t(p) * p.eta_d;
    CHECK(link_success_probability(p) == doctest::Approx(asym).epsilon(0.01));
}

TEST_CASE("link probability is loss-dominated at weak drive") {
    // P0 -> 2 tap eta_t eta_d and F0 -> 1 - tap as the drive vanishes
    const LinkParams p = params(0.01, 0.05);
    const double ratio =
        link_success_probability(p) / (2.0 * p.tap * eta_t(p) * p.eta_d);
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(link_fidelity(p) == doctest::Approx(1.0 - p.tap).epsilon(1e-4));
}

TEST_CASE("link fidelity depends on the tapped flux, not the drive") {
    // fixed s = alpha_sq * tap = 0.05
    std::vector<double> f;
    for (double a2 : {2.0, 4.0, 8.0}) f.push_back(link_fidelity(params(a2, 0.05 / a2)));
    CHECK(f[0] == doctest::Approx(0.909023161589).epsilon(1e-10));
    CHECK(f[1] == doctest::Approx(0.909090886372).epsilon(1e-10));
    CHECK(f[2] == doctest::Approx(0.909090909091).epsilon(1e-10));
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j)
            CHECK(std::abs(f[i] - f[j]) < 0.005);
}

TEST_CASE("swap fidelity at drive 2 needs efficiencies past 0.99") {
    const MixedLinkState pure{1.0, 0.0, 0};
    const double f_99 =
        swap_fidelity(pure, params(2.0, 1e-9, 100.0, 0.99, 0.99), Parity::odd);
    const double f_98 =
        swap_fidelity(pure, params(2.0, 1e-9, 100.0, 0.98, 0.98), Parity::odd);
    CHECK(f_99 == doctest::Approx(0.926367137007).epsilon(1e-9));
    CHECK(f_98 == doctest::Approx(0.864159478785).epsilon(1e-9));
    CHECK(f_99 >= 0.9);
    CHECK(f_98 < 0.9);
}

TEST_CASE("swap limits at weak drive") {
    // F1 -> 1/(2 - eta), P1 -> eta (2 - eta) / 2
    const LinkParams p = params(1e-4, 1e-6, 100.0, 0.9, 0.9);
    const double eta = p.eta();
    const MixedLinkState pure{1.0, 0.0, 0};
    CHECK(swap_fidelity(pure, p, Parity::odd) ==
          doctest::Approx(1.0 / (2.0 - eta)).epsilon(1e-7));
    CHECK(swap_success_probability(pure, p) ==
          doctest::Approx(eta * (2.0 - eta) / 2.0).epsilon(1e-8));
    // feeding the link's own output mixture moves the limit only by the
    // residual even weight ~ 1e-6
    const double f0 = link_fidelity(p);
    const MixedLinkState in{f0, 1.0 - f0, 0};
    CHECK(swap_fidelity(in, p, Parity::odd) ==
          doctest::Approx(1.0 / (2.0 - eta)).epsilon(2e-5));
    CHECK(swap_success_probability(in, p) ==
          doctest::Approx(eta * (2.0 - eta) / 2.0).epsilon(1e-6));
}

TEST_CASE("swap limits at strong drive") {
    // pure input, F1 -> 1 / (1 + tanh(2 (1-eta) alpha_sq cos^2))
    const MixedLinkState pure{1.0, 0.0, 0};
    for (double a2 : {2.0, 4.0}) {
        const LinkParams p = params(a2, 1e-6, 100.0, 0.9, 0.9);
        const double t = 2.0 * (1.0 - p.eta()) * a2 * (1.0 - p.tap);
        const double limit = 1.0 / (1.0 + std::tanh(t));
        CHECK(swap_fidelity(pure, p, Parity::odd) == doctest::Approx(limit).epsilon(0.01));
    }
    // at drive 4 the agreement is already tight
    const LinkParams p4 = params(4.0, 1e-6, 100.0, 0.9, 0.9);
    const double t4 = 2.0 * (1.0 - p4.eta()) * 4.0 * (1.0 - p4.tap);
    CHECK(swap_fidelity(pure, p4, Parity::odd) ==
          doctest::Approx(1.0 / (1.0 + std::tanh(t4))).epsilon(1e-6));
}

TEST_CASE("swap fixed reference point") {
    // input mixture 0.9/0.1 at drive 1, eta 0.81; independent-implementation values
    const LinkParams p = params(1.0, 1e-6, 100.0, 0.9, 0.9);
    const MixedLinkState in{0.9, 0.1, 0};
    CHECK(swap_probability_n(in, p, 1, Parity::odd) ==
          doctest::Approx(0.32844145077).epsilon(1e-10));
    CHECK(swap_probability_n(in, p, 2, Parity::even) ==
          doctest::Approx(0.269018339089).epsilon(1e-10));
    CHECK(swap_probability_n(in, p, 3, Parity::odd) ==
          doctest::Approx(0.143660003246).epsilon(1e-10));
    CHECK(swap_fidelity(in, p, Parity::odd) ==
          doctest::Approx(0.643737496445).epsilon(1e-10));
    CHECK(swap_fidelity(in, p, Parity::even) ==
          doctest::Approx(0.660358953719).epsilon(1e-10));
    CHECK(swap_numerator_odd(in, p) == doctest::Approx(0.946699447089).epsilon(1e-10));
    CHECK(swap_denominator_odd(in, p) == doctest::Approx(1.47062964689).epsilon(1e-10));
}

TEST_CASE("swap bounds hold across random operating points") {
    PhiloxStream rng(1234, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double fm = 0.5 + 0.5 * rng.uniform();
        const double a2 = 0.05 + 2.95 * rng.uniform();
        const double tap = 0.01 + 0.39 * rng.uniform();
        const double eta = 0.5 + 0.5 * rng.uniform();
        const LinkParams p = params(a2, tap, 100.0, eta, 1.0);
        const MixedLinkState in{fm, 1.0 - fm, 0};
        for (Parity par : {Parity::odd, Parity::even}) {
            const double n = swap_numerator(in, p, par);
            const double d = swap_denominator(in, p, par);
            CHECK(n >= 0.0);
            CHECK(d >= n);
            const double f = swap_fidelity(in, p, par);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
        }
        const SwapOutcome out = swap_outcome(in, p, Parity::odd);
        CHECK(out.state_after.f_minus + out.state_after.f_plus ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out.state_after.level == in.level + 1);
        CHECK(out.p_success > 0.0);
        CHECK(out.p_success < 1.0);
    }
}

TEST_CASE("swap count distribution sums to the no-click complement") {
    // with a pure input and saturated normalizations the total click
    // probability is 1 - e^{-eta x}, x = 2 alpha_sq cos^2
    const LinkParams p = params(13.0, 1e-12, 100.0, 0.9, 0.9);
    const MixedLinkState in{1.0, 0.0, 0};
    const double x = 2.0 * p.alpha_sq * (1.0 - p.tap);
    const double total = swap_success_probability(in, p, AcceptanceSet::all_counts);
    CHECK(total == doctest::Approx(-std::expm1(-p.eta() * x)).epsilon(1e-10));
}

TEST_CASE("swap outcome split at vanishing drive with perfect detection") {
    const LinkParams p = params(0.02, 1e-6, 100.0, 1.0, 1.0);
    const MixedLinkState in{1.0, 0.0, 0};
    const double odd = swap_success_probability(in, p, AcceptanceSet::odd_only);
    const double all = swap_success_probability(in, p, AcceptanceSet::all_counts);
    CHECK(odd == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(all - odd == doctest::Approx(0.250099973139).epsilon(1e-9));
    CHECK(1.0 - all == doctest::Approx(0.249900026861).epsilon(1e-9));
}

TEST_CASE("swap per-count probabilities reject mismatched parity") {
    const LinkParams p = params(0.5, 0.05, 100.0, 0.9, 0.9);
    const MixedLinkState in{0.9, 0.1, 0};
    CHECK_THROWS_AS(swap_probability_n(in, p, 2, Parity::odd), std::invalid_argument);
    CHECK_THROWS_AS(swap_probability_n(in, p, 1, Parity::even), std::invalid_argument);
    CHECK_THROWS_AS(swap_probability_n(in, p, 0, Parity::even), std::invalid_argument);
}

TEST_CASE("acceptance probability of the final filter") {
    const LinkParams p = params(0.1, 0.1, 100.0, 0.9, 0.9);
    CHECK(postselection_probability(0.8, p) == doctest::Approx(0.209952).epsilon(1e-12));
    // monotone in the input weight, capped at 1/2
    CHECK(postselection_probability(0.9, p) > postselection_probability(0.8, p));
    const LinkParams ideal = params(0.1, 0.1, 100.0, 1.0, 1.0);
    CHECK(postselection_probability(1.0, ideal) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("exact acceptance statistics match the reference corner values") {
    // reference values from a separately written branch-by-branch evaluation
    PostselectionStats s = postselected_corner(1.0, 0.05, 0.81);
    CHECK(s.p_accept == doctest::Approx(0.327194776111).epsilon(1e-9));
    CHECK(s.fidelity == doctest::Approx(0.999639217074).epsilon(1e-9));

    s = postselected_corner(1.0, 0.3, 0.81);
    CHECK(s.p_accept == doctest::Approx(0.29897018829).epsilon(1e-9));
    CHECK(s.fidelity == doctest::Approx(0.987279665381).epsilon(1e-9));

    s = postselected_corner(0.95, 0.2, 0.81);
    CHECK(s.p_accept == doctest::Approx(0.285844391587).epsilon(1e-9));
    CHECK(s.fidelity == doctest::Approx(0.990923470586).epsilon(1e-9));

    s = postselected_corner(0.9, 0.1, 0.9);
    CHECK(s.p_accept == doctest::Approx(0.324693672692).epsilon(1e-9));
    CHECK(s.fidelity == doctest::Approx(0.998246669578).epsilon(1e-9));
}

TEST_CASE("truncated-order fidelity tracks the exact corner at small drive") {
    CHECK(postselected_fidelity_leading_order(1.0, 0.05, 0.81) ==
          doctest::Approx(0.999639260466).epsilon(1e-9));
    CHECK(postselected_fidelity_leading_order(1.0, 0.3, 0.81) ==
          doctest::Approx(0.987333755838).epsilon(1e-9));
    // stays within a tenth of a percent of the exact value here
    const double exact = postselected_corner(0.95, 0.2, 0.81).fidelity;
    const double lo = postselected_fidelity_leading_order(0.95, 0.2, 0.81);
    CHECK(std::abs(exact - lo) < 1e-3);
}

TEST_CASE("filtered fidelity after one swap clears the quality bars") {
    // chains after a single swap, tap 0.1, eta 0.81
    for (double a2 : {0.05, 0.3}) {
        const LinkParams p = params(a2, 0.1, 150.0, 0.9, 0.9);
        const double f0 = link_fidelity(p);
        const MixedLinkState level0{f0, 1.0 - f0, 0};
        const double f1 = swap_fidelity(level0, p, Parity::odd);
        const PostselectionStats s =
            postselected_corner(f1, a2 * (1.0 - p.tap), p.eta());
        if (a2 == 0.05) {
            CHECK(f1 == doctest::Approx(0.707637708547).epsilon(1e-9));
            CHECK(s.p_accept == doctest::Approx(0.164565475687).epsilon(1e-9));
            CHECK(s.fidelity == doctest::Approx(0.997076602909).epsilon(1e-9));
            CHECK(s.fidelity > 0.99);
        } else {
            CHECK(f1 == doctest::Approx(0.692282029726).epsilon(1e-9));
            CHECK(s.p_accept == doctest::Approx(0.165739122482).epsilon(1e-9));
            CHECK(s.fidelity == doctest::Approx(0.910080302427).epsilon(1e-9));
            CHECK(s.fidelity > 0.9);
        }
    }
}

TEST_CASE("acceptance probability approaches its quadratic estimate as drive vanishes") {
    // relative error of p_accept against (eta^2/2) f^2 shrinks at least
    // linearly with the drive
    const double eta = 0.81;
    double prev = 1.0;
    for (double b2 : {0.3, 0.2, 0.1, 0.05}) {
        const PostselectionStats s = postselected_corner(1.0, b2, eta);
        const double naive = 0.5 * eta * eta;
        const double rel = std::abs(s.p_accept - naive) / naive;
        CHECK(rel < b2);
        CHECK(rel < prev);
        prev = rel;
    }
}

TEST_CASE("purification map") {
    CHECK(purification_map(0.7) == doctest::Approx(0.844827586207).epsilon(1e-10));
    CHECK(purification_map(purification_map(0.7)) ==
          doctest::Approx(0.967365028203).epsilon(1e-10));
    CHECK(purification_map(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(purification_map(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    // above the fixed point the map improves the weight
    CHECK(purification_map(0.6) > 0.6);
    CHECK(purification_map(0.7, PurificationForm::as_printed) ==
          doctest::Approx(0.49).epsilon(1e-12));
    CHECK_THROWS_AS(purification_map(0.0), std::invalid_argument);
    CHECK_THROWS_AS(purification_map(1.2), std::invalid_argument);
}

TEST_CASE("direct transmission baseline") {
    CHECK(direct_transmission_time(600.0, 1.0e10) ==
          doctest::Approx(69.8867687314).epsilon(1e-9));
    // zero distance costs one source period
    CHECK(direct_transmission_time(0.0, 1.0e10) == doctest::Approx(1e-10).epsilon(1e-12));
    // exponential in distance: T(2L) = T(L)^2 * rate
    const double t300 = direct_transmission_time(300.0, 1.0e10);
    const double t600 = direct_transmission_time(600.0, 1.0e10);
    CHECK(t600 == doctest::Approx(t300 * t300 * 1.0e10).epsilon(1e-9));
}

TEST_CASE("chain report at the published operating point") {
    // drive 0.13, tapped 0.16, four 150 km links, efficiencies 0.9/0.9;
    // reference values from an independent implementation
    const LinkParams p = params(0.13, 0.16, 150.0, 0.9, 0.9);
    const RateReport r = chain_time_four_links(p);
    CHECK(r.p0 == doctest::Approx(0.00957072755001).epsilon(1e-9));
    CHECK(r.f_link == doctest::Approx(0.837875256985).epsilon(1e-9));
    CHECK(r.t0_seconds == doctest::Approx(0.0783639484126).epsilon(1e-9));
    CHECK(r.f_swap1 == doctest::Approx(0.634021348528).epsilon(1e-9));
    CHECK(r.p1 == doctest::Approx(0.449928758926).epsilon(1e-9));
    CHECK(r.f_swap2 == doctest::Approx(0.431683450046).epsilon(1e-9));
    CHECK(r.p2 == doctest::Approx(0.386104639639).epsilon(1e-9));
    CHECK(r.p_ps == doctest::Approx(0.0611323146725).epsilon(1e-9));
    CHECK(r.f_postselected == doctest::Approx(0.906717824263).epsilon(1e-9));
    CHECK(r.total_seconds == doctest::Approx(24.9040783078).epsilon(1e-9));

    const RateReport bare = chain_time_four_links(p, ChainAccounting::bare_formula);
    CHECK(bare.total_seconds == doctest::Approx(16.6027188719).epsilon(1e-9));
    CHECK(r.total_seconds == doctest::Approx(1.5 * bare.total_seconds).epsilon(1e-12));
}

TEST_CASE("chain report endpoint with perfect hardware and vanishing drive") {
    const LinkParams p = params(1e-5, 1e-6, 100.0, 1.0, 1.0);
    const RateReport r = chain_time_four_links(p);
    CHECK(r.p1 == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(r.p2 == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(r.p_ps == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(r.f_postselected == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("chain time improves with detector efficiency") {
    const RateReport lo = chain_time_four_links(params(0.13, 0.16, 150.0, 0.8, 0.9));
    const RateReport hi = chain_time_four_links(params(0.13, 0.16, 150.0, 0.95, 0.9));
    CHECK(hi.total_seconds < lo.total_seconds);
    CHECK(hi.f_postselected > lo.f_postselected);
}

TEST_CASE("expected link time survives very long fibers") {
    // success probabilities far below double underflow are handled in logs
    const LinkParams p = params(0.5, 0.1, 20000.0);
    const double t = link_time(p);
    CHECK(std::isfinite(t));
    CHECK(t > 0.0);
    // ln T0 = ln(L0/c) - ln(P0 with transmission stripped) + L0/(2 L_att)
    LinkParams base = p;
    base.L0_km = 1e-6; // transmission ~ 1
    const double p_rest =
        link_success_probability(base) / (eta_t(base) * base.eta_d) * p.eta_d;
    const double expected_log =
        std::log(p.L0_km / p.c_km_s) - std::log(p_rest) + p.L0_km / (2.0 * p.L_att_km);
    CHECK(std::log(t) == doctest::Approx(expected_log).epsilon(1e-9));
}
