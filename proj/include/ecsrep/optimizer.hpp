#pragma once

#include <cstddef>
#include <vector>

#include "ecsrep/analytic.hpp"

namespace ecsrep {

// Search box for the four-link repeater's operating point. The link's
// alpha_sq/tap fields are ignored; everything else (lengths, efficiencies)
// is taken as-is.
struct SearchSpec {
    LinkParams link;
    double alpha_sq_min = 0.02, alpha_sq_max = 0.5;
    double tap_min = 0.02, tap_max = 0.45;
    std::size_t alpha_grid = 25, tap_grid = 25;
    double fidelity_floor = 0.9; // on the postselected end-to-end fidelity
    ChainAccounting accounting = ChainAccounting::paired_chains;
    void validate() const;
};

struct SurfacePoint {
    double alpha_sq = 0.0, tap = 0.0;
    double t_seconds = 0.0;
    double fidelity = 0.0; // postselected end-to-end fidelity
    bool feasible = false;
};

struct OptimizeResult {
    // True when any scanned point meets the floor; `best` is then the fastest
    // feasible point (refined), otherwise the highest-fidelity point found.
    bool feasible = false;
    SurfacePoint best;
    RateReport best_report;
    std::vector<SurfacePoint> surface; // coarse grid, alpha-major then tap
    std::size_t evaluations = 0;
};

OptimizeResult optimize(const SearchSpec& spec);

} // namespace ecsrep
