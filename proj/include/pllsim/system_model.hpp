#pragma once

#include <cmath>
#include <numbers>

namespace pllsim {

inline constexpr double kPi = std::numbers::pi;

// Per-unit grid and line parameters. Angles are rad, frequencies rad/s,
// voltages/currents pu throughout the library; Hz appears only at the CLI/CSV
// surface.
struct grid_params {
    double v_gn = 1.0;                    // nominal grid voltage magnitude (pu)
    double omega_gn = 2.0 * kPi * 50.0;   // nominal angular frequency (rad/s)
    double omega_g = 2.0 * kPi * 50.0;    // actual grid angular frequency (rad/s)
    double x_line_nom = 0.28;             // line reactance at nominal frequency (pu)
    double r_line = 0.1;                  // line resistance (pu)

    // Seconds-scaled inductance; keeps the 1 - kp*i_d*l loop denominator
    // dimensionless.
    [[nodiscard]] double l_line() const { return x_line_nom / omega_gn; }

    // Line impedance angle in [0, pi/2].
    [[nodiscard]] double theta_line() const { return std::atan2(x_line_nom, r_line); }

    // Grid frequency deviation from nominal (rad/s).
    [[nodiscard]] double delta_omega_grid() const { return omega_g - omega_gn; }
};

enum class pll_kind {
    srf,          // standard PI synchronous-reference-frame PLL
    first_order,  // proportional-only loop (ki pinned to zero)
    adaptive,     // ROCOF-switched hybrid of the two above
    freeze,       // holds the pre-fault phase/frequency during the fault
};

// PI controller gains plus output limit and controller flavour.
struct pll_design {
    double kp = 0.0;                          // proportional gain (rad/s per pu)
    double ki = 0.0;                          // integral gain (rad/s^2 per pu)
    double ki0 = 0.0;                         // integral gain restored by the adaptive mode
    double delta_omega_max = 2.0 * kPi * 5.0; // output frequency-deviation limit (rad/s)
    pll_kind kind = pll_kind::srf;
};

// Second-order design view <-> gains. A 2% settling band gives the fixed 9.2
// factor relating t_s and kp.
struct design_view {
    double zeta = 0.0;  // damping ratio
    double t_s = 0.0;   // settling time (s)
};

// Throws model_error for non-positive inputs.
[[nodiscard]] pll_design gains_from_design(double zeta, double t_s, double v_gn,
                                           pll_kind kind = pll_kind::srf);

// Inverse map; requires kp > 0 and ki > 0.
[[nodiscard]] design_view design_from_gains(double kp, double ki, double v_gn);

// Converter current reference in the PLL dq frame.
struct current_ref {
    double i_d = 0.0;    // active current (pu)
    double i_q = 0.0;    // reactive current (pu; negative injects reactive support)
    double i_max = 1.0;  // converter current rating (pu)
};

// Low-voltage ride-through policy: 2% reactive current per percent of sag
// below 0.9 pu, full reactive current below half voltage; i_d fills the
// remaining headroom on the rating circle. At or above 0.9 pu the converter
// runs at unity power factor.
[[nodiscard]] current_ref grid_code_current(double v_gcp, double i_max);

// q-axis voltage drop over the line at the given PLL frequency deviation:
// i_d*(omega_gn + delta_omega_pll)*l_line + i_q*r_line.
[[nodiscard]] double v_zq(const current_ref& ref, double delta_omega_pll,
                          const grid_params& grid);

enum class equilibrium_kind { none, single, pair };

// Solutions of v_zq = v_gcp * sin(delta) at the grid frequency.
struct equilibrium_set {
    equilibrium_kind kind = equilibrium_kind::none;
    double sep = 0.0;   // stable equilibrium angle (rad), valid unless kind == none
    double uep = 0.0;   // adjacent unstable equilibrium angle (rad)
    double v_zq = 0.0;  // q-axis line drop at equilibrium (pu)
};

// Equilibria of the phase-swing dynamics for a given sag level. The unstable
// point reported is the one the trajectory meets when it leaves the stable
// point (below the SEP for v_zq < 0, above it otherwise). A tangency within
// 1e-9 pu is reported as a single equilibrium at +-pi/2.
[[nodiscard]] equilibrium_set equilibria(const current_ref& ref, double v_gcp,
                                         const grid_params& grid);

// Sag level below which no equilibrium exists: |i_d*x_line(omega_g) + i_q*r_line|.
[[nodiscard]] double min_fault_voltage(const current_ref& ref, const grid_params& grid);

}  // namespace pllsim
