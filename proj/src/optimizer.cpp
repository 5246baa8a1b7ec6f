#include "ecsrep/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecsrep {

namespace {

constexpr double k_step_rel_tol = 1e-4;

// Strict-weak ordering for "better operating point": faster wins, exact time
// ties prefer the gentler drive (smaller alpha_sq, then smaller tap).
bool better_point(const SurfacePoint& a, const SurfacePoint& b) {
    if (a.t_seconds != b.t_seconds) return a.t_seconds < b.t_seconds;
    if (a.alpha_sq != b.alpha_sq) return a.alpha_sq < b.alpha_sq;
    return a.tap < b.tap;
}

struct Evaluator {
    const SearchSpec& spec;
    std::size_t evaluations = 0;
    RateReport last_report;

    SurfacePoint at(double alpha_sq, double tap) {
        LinkParams p = spec.link;
        p.alpha_sq = alpha_sq;
        p.tap = tap;
        const RateReport r = chain_time_four_links(p, spec.accounting);
        ++evaluations;
        last_report = r;
        SurfacePoint pt;
        pt.alpha_sq = alpha_sq;
        pt.tap = tap;
        pt.t_seconds = r.total_seconds;
        pt.fidelity = r.f_postselected;
        pt.feasible = r.f_postselected >= spec.fidelity_floor;
        return pt;
    }
};

} // namespace

void SearchSpec::validate() const {
    link.validate();
    if (!(alpha_sq_min > 0.0 && alpha_sq_min <= alpha_sq_max && alpha_sq_max <= 4.0))
        throw std::invalid_argument(
            "SearchSpec: need 0 < alpha_sq_min <= alpha_sq_max <= 4");
    if (!(tap_min > 0.0 && tap_min <= tap_max && tap_max < 0.5))
        throw std::invalid_argument("SearchSpec: need 0 < tap_min <= tap_max < 0.5");
    if (alpha_grid < 2 || tap_grid < 2)
        throw std::invalid_argument("SearchSpec: grids need at least two points per axis");
    if (!(fidelity_floor > 0.0 && fidelity_floor < 1.0))
        throw std::invalid_argument("SearchSpec: fidelity_floor outside (0,1)");
}

OptimizeResult optimize(const SearchSpec& spec) {
    spec.validate();
    Evaluator eval{spec, 0, {}};

    OptimizeResult res;
    res.surface.reserve(spec.alpha_grid * spec.tap_grid);

    const double da = (spec.alpha_sq_max - spec.alpha_sq_min) /
                      static_cast<double>(spec.alpha_grid - 1);
    const double dt = (spec.tap_max - spec.tap_min) / static_cast<double>(spec.tap_grid - 1);

    bool have_best = false, have_top_fid = false;
    SurfacePoint best, top_fid;
    for (std::size_t ia = 0; ia < spec.alpha_grid; ++ia) {
        const double a2 = spec.alpha_sq_min + da * static_cast<double>(ia);
        for (std::size_t it = 0; it < spec.tap_grid; ++it) {
            const double tap = spec.tap_min + dt * static_cast<double>(it);
            const SurfacePoint pt = eval.at(a2, tap);
            res.surface.push_back(pt);
            if (pt.feasible && (!have_best || better_point(pt, best))) {
                best = pt;
                have_best = true;
            }
            if (!have_top_fid || pt.fidelity > top_fid.fidelity) {
                top_fid = pt;
                have_top_fid = true;
            }
        }
    }

    if (!have_best) {
        res.feasible = false;
        res.best = eval.at(top_fid.alpha_sq, top_fid.tap);
        res.best_report = eval.last_report;
        res.evaluations = eval.evaluations;
        return res;
    }

    // Coordinate descent with halving steps, kept inside the box and the
    // feasible set.
    double step_a = da, step_t = dt;
    const double tol_a = k_step_rel_tol * (spec.alpha_sq_max - spec.alpha_sq_min);
    const double tol_t = k_step_rel_tol * (spec.tap_max - spec.tap_min);
    while (step_a > tol_a || step_t > tol_t) {
        bool moved = false;
        for (int axis = 0; axis < 2; ++axis) {
            const double step = (axis == 0) ? step_a : step_t;
            for (double dir : {-1.0, 1.0}) {
                double a2 = best.alpha_sq + ((axis == 0) ? dir * step : 0.0);
                double tap = best.tap + ((axis == 1) ? dir * step : 0.0);
                a2 = std::clamp(a2, spec.alpha_sq_min, spec.alpha_sq_max);
                tap = std::clamp(tap, spec.tap_min, spec.tap_max);
                if (a2 == best.alpha_sq && tap == best.tap) continue;
                const SurfacePoint pt = eval.at(a2, tap);
                if (pt.feasible && better_point(pt, best)) {
                    best = pt;
                    moved = true;
                }
            }
        }
        if (!moved) {
            step_a *= 0.5;
            step_t *= 0.5;
        }
    }

    res.feasible = true;
    res.best = eval.at(best.alpha_sq, best.tap);
    res.best_report = eval.last_report;
    res.evaluations = eval.evaluations;
    return res;
}

} // namespace ecsrep
