#pragma once

#include <vector>

#include "pllsim/swing_dynamics.hpp"
#include "pllsim/system_model.hpp"

namespace pllsim {

enum class search_status { found, no_convergence };

struct critical_zeta_result {
    double ratio = 0.0;        // |quadrature bias| / residual voltage, dimensionless
    double zeta_crit = 0.0;    // smallest converging damping ratio (NaN if none)
    double bracket_lo = 0.0;   // largest damping ratio observed to fail
    double bracket_hi = 0.0;   // smallest damping ratio observed to converge
    search_status status = search_status::found;
};

struct zeta_search_options {
    double t_s = 0.1;          // settling time held fixed across trials, s
    double zeta_init = 0.1;
    double coarse_step = 0.05;
    double tol = 1e-3;
    double zeta_max = 10.0;
    double h = 5e-5;           // trial integration step, s
    double t_max = 5.0;        // trial horizon, s
};

// Smallest damping ratio for which the fault-on trajectory (started at the
// pre-fault operating point with a cleared integrator) settles to the fault
// equilibrium. Ascends from zeta_init in coarse steps until a converging trial
// is found, then bisects the bracket down to tol. If the very first trial
// already converges, the bracket is refined downward from zero instead.
[[nodiscard]] critical_zeta_result critical_zeta(const run_plan& base,
                                                 const zeta_search_options& opts = {});

// One search per voltage ratio with the canonical timeline: unity-voltage
// active-current pre-fault, pure reactive injection under fault, and the fault
// residual voltage chosen as i_max * r_line / ratio so the ratio is exact.
// Each ratio must lie in (0, 1]; the ratio-1 entry cannot converge.
[[nodiscard]] std::vector<critical_zeta_result> critical_zeta_curve(
    const std::vector<double>& ratios, const grid_params& grid,
    const zeta_search_options& opts = {});

// The canonical two-segment timeline used by the curve, exposed so callers can
// inspect equilibria or reuse it for single searches.
[[nodiscard]] run_plan curve_plan(double ratio, const grid_params& grid);

}  // namespace pllsim
