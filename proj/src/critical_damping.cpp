#include "pllsim/critical_damping.hpp"

#include <cmath>
#include <limits>

#include "pllsim/adaptive_pll.hpp"
#include "pllsim/errors.hpp"

namespace pllsim {

namespace {

bool trial_converges(const run_plan& held, double sep_prefault, double zeta,
                     const zeta_search_options& opts, const grid_params& grid) {
    pll_setup setup;
    setup.design = gains_from_design(zeta, opts.t_s, grid.v_gn, pll_kind::srf);
    const trajectory traj =
        integrate_from(held, setup, {sep_prefault, 0.0, 0.0}, opts.h, opts.t_max);
    return traj.verdict == classification::converged;
}

}  // namespace

critical_zeta_result critical_zeta(const run_plan& base, const zeta_search_options& opts) {
    if (!(opts.zeta_init > 0.0)) {
        throw model_error("initial damping ratio must be positive");
    }
    const grid_params& grid = base.grid;
    const run_plan held = portrait_plan(base);
    const segment& fault_seg = held.segments.front();
    const current_ref fault_ref = fault_seg.ref(base.i_max);
    const equilibrium_set eq_fault = equilibria(fault_ref, fault_seg.v_gcp, grid);
    if (eq_fault.kind == equilibrium_kind::none) {
        throw model_error(
            "fault condition admits no equilibrium; loss of synchronism is inevitable");
    }

    const segment& pre_seg = base.segments.front();
    const equilibrium_set eq_pre =
        equilibria(pre_seg.ref(base.i_max), pre_seg.v_gcp, grid);
    if (eq_pre.kind == equilibrium_kind::none) {
        throw model_error("pre-fault condition admits no equilibrium");
    }
    const double sep0 = eq_pre.sep;

    critical_zeta_result result;
    result.ratio = std::fabs(eq_fault.v_zq) / fault_seg.v_gcp;

    double lo = 0.0;
    double hi = opts.zeta_init;
    if (!trial_converges(held, sep0, opts.zeta_init, opts, grid)) {
        lo = opts.zeta_init;
        bool found = false;
        for (int k = 1;; ++k) {
            const double z = opts.zeta_init + static_cast<double>(k) * opts.coarse_step;
            if (z > opts.zeta_max + 1e-12) {
                break;
            }
            if (trial_converges(held, sep0, z, opts, grid)) {
                hi = z;
                found = true;
                break;
            }
            lo = z;
        }
        if (!found) {
            result.zeta_crit = std::numeric_limits<double>::quiet_NaN();
            result.bracket_lo = lo;
            result.bracket_hi = std::numeric_limits<double>::quiet_NaN();
            result.status = search_status::no_convergence;
            return result;
        }
    }

    while (hi - lo > opts.tol) {
        const double mid = 0.5 * (lo + hi);
        if (trial_converges(held, sep0, mid, opts, grid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    result.zeta_crit = hi;
    result.bracket_lo = lo;
    result.bracket_hi = hi;
    result.status = search_status::found;
    return result;
}

run_plan curve_plan(double ratio, const grid_params& grid) {
    if (!(ratio > 0.0) || ratio > 1.0) {
        throw model_error("voltage ratio must lie in (0, 1]");
    }
    run_plan plan;
    plan.grid = grid;
    plan.i_max = 1.0;

    segment pre;
    pre.t_start = 0.0;
    pre.v_gcp = 1.0;
    pre.use_grid_code = false;
    pre.explicit_ref = current_ref{1.0, 0.0, plan.i_max};

    segment fault;
    fault.t_start = 1.0;
    fault.v_gcp = plan.i_max * grid.r_line / ratio;
    fault.use_grid_code = false;
    fault.explicit_ref = current_ref{0.0, -1.0, plan.i_max};

    plan.segments = {pre, fault};
    return plan;
}

std::vector<critical_zeta_result> critical_zeta_curve(const std::vector<double>& ratios,
                                                      const grid_params& grid,
                                                      const zeta_search_options& opts) {
    std::vector<critical_zeta_result> results;
    results.reserve(ratios.size());
    for (const double ratio : ratios) {
        critical_zeta_result entry;
        const run_plan plan = curve_plan(ratio, grid);
        const segment& fault_seg = plan.segments.back();
        const equilibrium_set eq =
            equilibria(fault_seg.ref(plan.i_max), fault_seg.v_gcp, grid);
        if (eq.kind == equilibrium_kind::none) {
            entry.ratio = ratio;
            entry.zeta_crit = std::numeric_limits<double>::quiet_NaN();
            entry.bracket_lo = 0.0;
            entry.bracket_hi = std::numeric_limits<double>::quiet_NaN();
            entry.status = search_status::no_convergence;
        } else {
            entry = critical_zeta(plan, opts);
            entry.ratio = ratio;
        }
        results.push_back(entry);
    }
    return results;
}

}  // namespace pllsim
