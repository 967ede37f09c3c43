#pragma once

#include <optional>
#include <vector>

#include "pllsim/adaptive_pll.hpp"
#include "pllsim/system_model.hpp"

namespace pllsim {

// Hybrid simulation state. delta is kept unwrapped so synchronization loss
// shows up as unbounded drift.
struct swing_state {
    double delta = 0.0;      // theta_pll - theta_gcp (rad)
    double xi = 0.0;         // PI integrator state (rad/s)
    double theta_gcp = 0.0;  // absolute grid angle (rad)
};

// One piece of the fault timeline. The segment's current reference either
// follows the ride-through policy for its voltage or is given explicitly.
struct segment {
    double t_start = 0.0;
    double v_gcp = 1.0;
    bool use_grid_code = true;
    current_ref explicit_ref;  // used when use_grid_code is false

    [[nodiscard]] current_ref ref(double i_max) const {
        return use_grid_code ? grid_code_current(v_gcp, i_max) : explicit_ref;
    }
};

// Everything the integrator needs besides the controller: grid, rating, and
// the ordered fault timeline (first segment must start at t = 0).
struct run_plan {
    grid_params grid;
    double i_max = 1.0;
    std::vector<segment> segments;
    bool freq_dep_reactance = true;
};

enum class classification { converged, lost_synchronism, undetermined };

// Controller mode tag recorded per sample.
inline constexpr int kModeFrozen = 0;
inline constexpr int kModeFirstOrder = 1;
inline constexpr int kModeSecondOrder = 2;

struct sample {
    double t = 0.0;
    double delta = 0.0;        // rad
    double delta_dot = 0.0;    // rad/s, movement of delta
    double v_pccq = 0.0;       // pu, q-axis PCC voltage at the limited frequency
    int mode = kModeSecondOrder;
    double ki_active = 0.0;    // integral gain in effect after this sample
    double rocof_hz_s = 0.0;   // filtered ROCOF
    double i_d = 0.0;
    double i_q = 0.0;
    double v_gcp = 0.0;
    double delta_omega = 0.0;  // rad/s, limited PLL frequency deviation
    double xi = 0.0;           // rad/s, PI integrator state (not emitted to CSV)
};

struct trajectory_metrics {
    double final_delta_error = 0.0;    // |delta - sep| at the end, vs final segment
    double peak_abs_delta_dot = 0.0;   // rad/s
    std::optional<double> uep_cross_time;  // first directional crossing, any segment
};

struct trajectory {
    std::vector<sample> samples;
    classification verdict = classification::undetermined;
    trajectory_metrics metrics;
};

// Result of resolving the algebraic PLL loop at one state.
struct loop_output {
    double delta_omega = 0.0;  // limited frequency deviation (rad/s)
    double delta_dot = 0.0;    // delta_omega - (omega_g - omega_gn)
    double v_pccq = 0.0;       // recomputed at the limited frequency
    bool saturated = false;
};

// Solves delta_omega = kp * v_pccq + xi where v_pccq itself depends on
// delta_omega through the frequency-dependent reactance, then applies the
// output limit. Throws model_error when the loop denominator 1 - kp*i_d*l
// is not positive. With freq_dep_reactance = false the reactance stays at
// nominal and the loop is explicit.
[[nodiscard]] loop_output delta_dot(const swing_state& state, const current_ref& ref,
                                    double v_gcp, const grid_params& grid,
                                    const pll_design& design,
                                    bool freq_dep_reactance = true);

// Equivalent second-order form, used as a cross-validation oracle; cannot
// express limiting or mode switching.
[[nodiscard]] double second_order_rhs(double delta, double delta_dot_value,
                                      const current_ref& ref, double v_gcp,
                                      const grid_params& grid, const pll_design& design);

// Fixed-step RK4 over the timeline, events applied at step boundaries.
// Initial state: segment-0 SEP with the integrator pre-loaded to the grid
// frequency offset (zero for the first-order kind). Throws model_error when
// h is outside (0, 2e-4] or the initial segment has no equilibrium;
// integration_diverged when the state leaves the finite range.
[[nodiscard]] trajectory integrate(const run_plan& plan, const pll_setup& setup,
                                   double h, double t_max);

// Same, from an explicit initial state.
[[nodiscard]] trajectory integrate_from(const run_plan& plan, const pll_setup& setup,
                                        swing_state init, double h, double t_max);

// Verdict for a trajectory against one equilibrium context: converged when the
// final 0.5 s stays within 1e-2 rad / 5e-2 rad/s of the SEP, lost when the UEP
// is passed by 0.05 rad moving outward, undetermined otherwise. A missing
// equilibrium means synchronization loss outright.
[[nodiscard]] classification classify(const trajectory& traj, const equilibrium_set& eq);

// Directional escape test used by classification: past the UEP by a 0.05 rad
// margin and still moving away from the SEP.
[[nodiscard]] bool uep_crossed(const equilibrium_set& eq, double delta,
                               double delta_dot_value);

// Initial (delta, delta_dot) pair for a portrait.
struct portrait_point {
    double delta = 0.0;
    double delta_dot = 0.0;
};

// Integrates one trajectory per initial point with the plan's first sub-0.9-pu
// segment held for the whole horizon (the portrait view of the fault). An
// empty point list defaults to the fault-on condition: segment-0 SEP with
// xi = 0.
[[nodiscard]] std::vector<trajectory> phase_portrait(const run_plan& plan,
                                                     const pll_setup& setup,
                                                     const std::vector<portrait_point>& init_points,
                                                     double h, double t_max);

// The held-segment plan a portrait integrates (also useful for reporting).
[[nodiscard]] run_plan portrait_plan(const run_plan& plan);

// Maps a portrait point to the state-form initial condition in the given
// segment context.
[[nodiscard]] swing_state portrait_init(const portrait_point& point, const segment& seg,
                                        const run_plan& plan, const pll_setup& setup);

}  // namespace pllsim
