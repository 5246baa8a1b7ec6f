#include <cmath>
#include <string>

#include "doctest.h"
#include "ecsrep/analytic.hpp"
#include "ecsrep/oracle.hpp"

using namespace ecsrep;

namespace {

LinkParams params(double a2, double tap, double eta_d = 0.9, double eta_m = 0.9) {
    LinkParams p;
    p.alpha_sq = a2;
    p.tap = tap;
    p.L0_km = 150.0;
    p.eta_d = eta_d;
    p.eta_m = eta_m;
    return p;
}

} // namespace

TEST_CASE("final-filter circuit agrees with the closed corner evaluation") {
    struct Point {
        double a2, tap, fm1, fm2;
    };
    const Point pts[] = {
        {0.05, 0.1, 1.0, 1.0},
        {0.3, 0.1, 0.9, 0.9},
        {0.2, 0.02, 0.95, 0.85},
    };
    for (const auto& pt : pts) {
        const LinkParams p = params(pt.a2, pt.tap);
        const MixedLinkState c1{pt.fm1, 1.0 - pt.fm1, 2};
        const MixedLinkState c2{pt.fm2, 1.0 - pt.fm2, 2};
        const CircuitResult res = postselection_circuit(c1, c2, p);
        // the closed form assumes both chains share one mixture weight;
        // compare at matched chains only
        if (pt.fm1 == pt.fm2) {
            const PostselectionStats ref =
                postselected_corner(pt.fm1, pt.a2 * (1.0 - pt.tap), p.eta());
            CAPTURE(pt.a2);
            CHECK(res.probability == doctest::Approx(ref.p_accept).epsilon(1e-9));
            CHECK(res.fidelity_vs_target == doctest::Approx(ref.fidelity).epsilon(1e-9));
        } else {
            CHECK(res.probability > 0.0);
            CHECK(res.fidelity_vs_target > 0.0);
            CHECK(res.fidelity_vs_target <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("filtered chains pass the quality bars after one swap") {
    // chains after a single swap at tap 0.1, efficiencies 0.9 * 0.9
    for (double a2 : {0.05, 0.3}) {
        const LinkParams p = params(a2, 0.1);
        const double f0 = link_fidelity(p);
        const MixedLinkState level0{f0, 1.0 - f0, 0};
        const SwapOutcome swapped = swap_outcome(level0, p, Parity::odd);
        const CircuitResult res =
            postselection_circuit(swapped.state_after, swapped.state_after, p);
        CAPTURE(a2);
        if (a2 == 0.05) {
            CHECK(res.fidelity_vs_target > 0.99);
            CHECK(res.fidelity_vs_target == doctest::Approx(0.997076602909).epsilon(1e-8));
            CHECK(res.probability == doctest::Approx(0.164565475687).epsilon(1e-8));
        } else {
            CHECK(res.fidelity_vs_target > 0.9);
            CHECK(res.fidelity_vs_target == doctest::Approx(0.910080302427).epsilon(1e-8));
            CHECK(res.probability == doctest::Approx(0.165739122482).epsilon(1e-8));
        }
    }
}

TEST_CASE("acceptance approaches one half with perfect hardware and no drive") {
    const LinkParams p = params(0.02, 1e-6, 1.0, 1.0);
    const MixedLinkState clean{1.0, 0.0, 2};
    const CircuitResult res = postselection_circuit(clean, clean, p);
    CHECK(res.probability == doctest::Approx(0.5).epsilon(0.05));
    CHECK(res.fidelity_vs_target == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("acceptance probability tracks its quadratic estimate at small drive") {
    const LinkParams p = params(0.05, 0.1);
    const MixedLinkState chain{0.8, 0.2, 2};
    const CircuitResult res = postselection_circuit(chain, chain, p);
    const double naive = postselection_probability(0.8, p);
    CHECK(std::abs(res.probability - naive) / naive < p.alpha_sq);
}

TEST_CASE("accepted state lives on the one-photon-per-node corner") {
    const LinkParams p = params(0.2, 0.1);
    const MixedLinkState chain{0.9, 0.1, 2};
    const CircuitResult res = postselection_circuit(chain, chain, p);
    const DensityOperator& rho = res.conditional_state;
    REQUIRE(rho.side() == 16);
    CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rho.min_eigenvalue() > -1e-9);
    // mode order (A1, C1, A2, C2): one photon at node A = modes {0,2},
    // one at node C = modes {1,3}
    for (std::size_t i = 0; i < 16; ++i) {
        const std::size_t m0 = (i >> 3) & 1, m1 = (i >> 2) & 1, m2 = (i >> 1) & 1,
                          m3 = i & 1;
        const bool allowed = (m0 + m2 == 1) && (m1 + m3 == 1);
        if (!allowed) CHECK(std::abs(rho.mat(static_cast<long>(i), static_cast<long>(i))) < 1e-12);
    }
}

TEST_CASE("pattern classes form a distribution consistent with acceptance") {
    const LinkParams p = params(0.2, 0.1);
    const MixedLinkState chain{0.9, 0.1, 2};
    const auto classes = postselection_pattern_classes(chain, chain, p);
    double total = 0.0, one_one = 0.0;
    for (const auto& c : classes) {
        CHECK(c.probability >= -1e-15);
        total += c.probability;
        if (c.label == "nA=1 nC=1") one_one = c.probability;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    const CircuitResult res = postselection_circuit(chain, chain, p);
    CHECK(one_one == doctest::Approx(res.probability).epsilon(1e-9));
}

TEST_CASE("final filter refuses the strong-drive regime") {
    const LinkParams p = params(0.5, 0.1);
    const MixedLinkState chain{0.9, 0.1, 2};
    CHECK_THROWS_AS(postselection_circuit(chain, chain, p), std::invalid_argument);
}
