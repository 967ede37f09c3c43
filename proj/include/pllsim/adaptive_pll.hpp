#pragma once

#include "pllsim/system_model.hpp"

namespace pllsim {

// First-order low-pass filter over the derivative of the PLL output-frequency
// magnitude. Input is rad/s; the filtered rate is kept in Hz/s because the
// switching thresholds are specified in Hz/s.
struct rocof_detector {
    double t_filter = 0.2;         // LPF time constant (s)
    double prev_abs_domega = 0.0;  // previous |delta_omega| (rad/s)
    double lpf_state = 0.0;        // filtered rate (Hz/s)

    // Advance one step of size h with the current frequency deviation; returns
    // the updated filtered rate.
    double step(double delta_omega, double h);
};

// Hysteresis thresholds for the hybrid controller (Hz/s).
struct switch_thresholds {
    double rocof_1 = 5.0;  // |rocof| at or above this -> first-order mode
    double rocof_2 = 0.5;  // |rocof| below this -> second-order mode
};

enum class pll_mode {
    second_order,  // ki active (= ki0)
    first_order,   // ki = 0, integrator held
};

// Hysteresis mode selection; between the thresholds the mode is unchanged.
[[nodiscard]] pll_mode mode_switch(pll_mode mode, double rocof_hz_s,
                                   const switch_thresholds& thr);

// Upper bound on the switch-to-first-order threshold so that normal grid-code
// current steps never trigger the fast mode:
//   kp * i_max * r_line * (1 - exp(-delta_t / t_filter)) / delta_t.
// delta_t is the current-step rise interval, at most half a nominal cycle.
// Throws model_error when delta_t is outside (0, 0.01] s.
[[nodiscard]] double rocof1_upper_bound(const pll_design& design, const grid_params& grid,
                                        double i_max, double delta_t, double t_filter);

// Phase extrapolated by the freeze baseline from the state captured at the
// freeze instant.
[[nodiscard]] double freeze_pll_phase(double t_since_freeze, double theta_prefreeze,
                                      double omega_prefreeze);

// Full controller configuration for a run.
struct pll_setup {
    pll_design design;
    switch_thresholds thresholds;
    double t_filter = 0.2;  // ROCOF LPF time constant (s)
};

}  // namespace pllsim
