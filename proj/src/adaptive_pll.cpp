#include "pllsim/adaptive_pll.hpp"

#include <cmath>

#include "pllsim/errors.hpp"

namespace pllsim {

double rocof_detector::step(double delta_omega, double h) {
    const double abs_domega = std::fabs(delta_omega);
    // Derivative of the frequency magnitude, converted rad/s -> Hz before
    // dividing by h so the raw rate is already Hz/s.
    const double raw = (abs_domega - prev_abs_domega) / (2.0 * kPi * h);
    prev_abs_domega = abs_domega;
    // Forward-Euler discretization of the first-order lag; h << t_filter.
    lpf_state += (h / t_filter) * (raw - lpf_state);
    return lpf_state;
}

pll_mode mode_switch(pll_mode mode, double rocof_hz_s, const switch_thresholds& thr) {
    const double magnitude = std::fabs(rocof_hz_s);
    if (magnitude >= thr.rocof_1) {
        return pll_mode::first_order;
    }
    if (magnitude < thr.rocof_2) {
        return pll_mode::second_order;
    }
    return mode;
}

double rocof1_upper_bound(const pll_design& design, const grid_params& grid,
                          double i_max, double delta_t, double t_filter) {
    if (delta_t <= 0.0 || delta_t > 0.01) {
        throw model_error("rocof1_upper_bound: delta_t must lie in (0, 0.01] s");
    }
    const double response = 1.0 - std::exp(-delta_t / t_filter);
    return design.kp * i_max * grid.r_line * response / delta_t;
}

double freeze_pll_phase(double t_since_freeze, double theta_prefreeze,
                        double omega_prefreeze) {
    return theta_prefreeze + omega_prefreeze * t_since_freeze;
}

}  // namespace pllsim
