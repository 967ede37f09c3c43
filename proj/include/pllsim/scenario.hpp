#pragma once

#include <string>
#include <vector>

#include "pllsim/adaptive_pll.hpp"
#include "pllsim/swing_dynamics.hpp"
#include "pllsim/system_model.hpp"

namespace pllsim {

struct scenario_event {
    double t = 0.0;            // s
    double v_gcp = 1.0;        // pu
    bool use_grid_code = true; // false: explicit i_d / i_q below
    double i_d = 0.0;          // pu
    double i_q = 0.0;          // pu
};

// Surface representation of one simulation configuration. Frequencies are kept
// in Hz exactly as written so that serialize -> parse reproduces the scenario
// bit for bit; rad/s values are derived on demand.
struct scenario {
    double v_gn = 1.0;
    double f_gn_hz = 50.0;
    double f_g_offset_hz = 0.0;
    double x_line = 0.28;
    double r_line = 0.1;
    double i_max = 1.0;

    pll_kind kind = pll_kind::srf;
    double kp = 0.0;              // resolved at parse time
    double ki = 0.0;
    double ki0 = 0.0;
    double f_dev_max_hz = 5.0;
    double rocof_switch_hzps = 5.0;
    double rocof_return_hzps = 0.5;
    double t_filter_s = 0.2;

    double dt = 5e-5;
    double t_max = 5.0;
    bool freq_dep_reactance = true;

    std::vector<scenario_event> events;   // non-empty, first at t = 0
    std::vector<std::string> warnings;    // advisory only, not serialized

    [[nodiscard]] grid_params grid() const;
    [[nodiscard]] pll_setup setup() const;
    [[nodiscard]] run_plan plan() const;
};

// Parses the flat sectioned key-value dialect documented in
// docs/scenario_format.md. Unknown keys, conflicting gain settings and
// non-monotone events raise parse_error carrying the offending line number.
// An empty document yields the default no-fault five-second scenario.
[[nodiscard]] scenario parse_scenario(const std::string& text);

// Reads and parses a scenario file; a missing path is an I/O error.
[[nodiscard]] scenario load_scenario(const std::string& path);

// Canonical serialization: resolved gains (kp/ki), full-precision numbers,
// fixed section and key order. parse(serialize(s)) reproduces s exactly.
[[nodiscard]] std::string serialize_scenario(const scenario& s);

}  // namespace pllsim
