#include "pllsim/system_model.hpp"

#include <algorithm>
#include <cmath>

#include "pllsim/errors.hpp"

namespace pllsim {

namespace {
// 2% settling band of the canonical second-order step response.
constexpr double kSettlingFactor = 9.2;
constexpr double kSingleEqTolerance = 1e-9;
}  // namespace

pll_design gains_from_design(double zeta, double t_s, double v_gn, pll_kind kind) {
    if (zeta <= 0.0 || t_s <= 0.0 || v_gn <= 0.0) {
        throw model_error("gains_from_design requires positive zeta, t_s, v_gn");
    }
    pll_design d;
    d.kp = kSettlingFactor / (v_gn * t_s);
    d.ki = v_gn * d.kp * d.kp / (4.0 * zeta * zeta);
    d.ki0 = d.ki;
    d.kind = kind;
    if (kind == pll_kind::first_order) {
        d.ki = 0.0;
    }
    return d;
}

design_view design_from_gains(double kp, double ki, double v_gn) {
    if (kp <= 0.0 || ki <= 0.0 || v_gn <= 0.0) {
        throw model_error("design_from_gains requires positive kp, ki, v_gn");
    }
    design_view v;
    v.t_s = kSettlingFactor / (v_gn * kp);
    v.zeta = 0.5 * kp * std::sqrt(v_gn / ki);
    return v;
}

current_ref grid_code_current(double v_gcp, double i_max) {
    current_ref ref;
    ref.i_max = i_max;
    if (v_gcp >= 0.9) {
        ref.i_d = i_max;
        ref.i_q = 0.0;
        return ref;
    }
    ref.i_q = -std::min(1.0, 2.0 * (1.0 - v_gcp)) * i_max;
    ref.i_d = std::sqrt(std::max(0.0, i_max * i_max - ref.i_q * ref.i_q));
    return ref;
}

double v_zq(const current_ref& ref, double delta_omega_pll, const grid_params& grid) {
    return ref.i_d * (grid.omega_gn + delta_omega_pll) * grid.l_line() +
           ref.i_q * grid.r_line;
}

equilibrium_set equilibria(const current_ref& ref, double v_gcp, const grid_params& grid) {
    equilibrium_set eq;
    // Equilibrium means the PLL tracks the grid frequency, so the reactance is
    // evaluated at omega_g.
    eq.v_zq = v_zq(ref, grid.delta_omega_grid(), grid);
    const double drop = std::fabs(eq.v_zq);
    if (drop > v_gcp + kSingleEqTolerance) {
        eq.kind = equilibrium_kind::none;
        return eq;
    }
    if (std::fabs(drop - v_gcp) <= kSingleEqTolerance) {
        eq.kind = equilibrium_kind::single;
        eq.sep = eq.uep = (eq.v_zq < 0.0) ? -kPi / 2.0 : kPi / 2.0;
        return eq;
    }
    eq.kind = equilibrium_kind::pair;
    eq.sep = std::asin(eq.v_zq / v_gcp);
    eq.uep = (eq.v_zq < 0.0) ? (-kPi - eq.sep) : (kPi - eq.sep);
    return eq;
}

double min_fault_voltage(const current_ref& ref, const grid_params& grid) {
    const double x_at_omega_g = grid.omega_g * grid.l_line();
    return std::fabs(ref.i_d * x_at_omega_g + ref.i_q * grid.r_line);
}

}  // namespace pllsim
