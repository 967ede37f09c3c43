#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "pllsim/errors.hpp"
#include "pllsim/reporting.hpp"
#include "pllsim/scenario.hpp"

using namespace pllsim;

TEST_CASE("empty document yields the default no-fault run") {
    const scenario s = parse_scenario("");
    CHECK(s.v_gn == 1.0);
    CHECK(s.f_gn_hz == 50.0);
    CHECK(s.x_line == 0.28);
    CHECK(s.r_line == 0.1);
    CHECK(s.i_max == 1.0);
    CHECK(s.kind == pll_kind::srf);
    CHECK(s.kp == doctest::Approx(92.0).epsilon(1e-13));
    CHECK(s.ki == doctest::Approx(8464.0 / 9.0).epsilon(1e-13));
    CHECK(s.dt == 5e-5);
    CHECK(s.t_max == 5.0);
    CHECK(s.freq_dep_reactance);
    REQUIRE(s.events.size() == 1);
    CHECK(s.events[0].t == 0.0);
    CHECK(s.events[0].v_gcp == 1.0);
    CHECK(s.events[0].use_grid_code);
    CHECK(s.warnings.empty());
}

TEST_CASE("a single sag event fills everything else from defaults") {
    const scenario s = parse_scenario("[event]\nt = 2.5\nv_gcp = 0.14\n");
    REQUIRE(s.events.size() == 2);
    CHECK(s.events[0].t == 0.0);
    CHECK(s.events[0].v_gcp == 1.0);
    CHECK(s.events[1].t == 2.5);
    CHECK(s.events[1].v_gcp == 0.14);
    CHECK(s.events[1].use_grid_code);
    const run_plan plan = s.plan();
    // Ride-through policy resolves the sag to full reactive injection.
    CHECK(plan.segments[1].ref(plan.i_max).i_q == -1.0);
    CHECK(plan.segments[1].ref(plan.i_max).i_d == 0.0);
}

TEST_CASE("design view keys convert to gains") {
    const scenario s = parse_scenario("[pll]\nzeta = 0.5\nt_s = 0.1\n");
    CHECK(s.kp == doctest::Approx(92.0).epsilon(1e-13));
    CHECK(s.ki == doctest::Approx(8464.0).epsilon(1e-13));
    CHECK(s.ki0 == doctest::Approx(8464.0).epsilon(1e-13));
}

TEST_CASE("explicit gains are taken verbatim") {
    const scenario s = parse_scenario("[pll]\nkp = 100\nki = 500\n");
    CHECK(s.kp == 100.0);
    CHECK(s.ki == 500.0);
    CHECK(s.ki0 == 500.0);
    const scenario with_override = parse_scenario("[pll]\nkp = 100\nki = 500\nki0 = 700\n");
    CHECK(with_override.ki0 == 700.0);
}

TEST_CASE("first-order kind forces a zero active integral gain") {
    const scenario s = parse_scenario("[pll]\nkind = first_order\nkp = 100\nki = 500\n");
    CHECK(s.ki == 0.0);
    CHECK(s.ki0 == 500.0);
    const scenario from_design = parse_scenario("[pll]\nkind = first_order\nzeta = 0.5\n");
    CHECK(from_design.ki == 0.0);
    CHECK(from_design.ki0 == doctest::Approx(8464.0).epsilon(1e-13));
}

TEST_CASE("grid section reshapes the derived parameters") {
    const scenario s = parse_scenario(
        "[grid]\nv_gn = 1.1\nf_gn_hz = 60\nf_g_offset_hz = 0.5\nx_line = 0.3\n"
        "r_line = 0.05\ni_max = 1.2\n");
    const grid_params g = s.grid();
    CHECK(g.v_gn == 1.1);
    CHECK(g.omega_gn == doctest::Approx(2.0 * kPi * 60.0).epsilon(1e-13));
    CHECK(g.delta_omega_grid() == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(g.x_line_nom == 0.3);
    CHECK(g.r_line == 0.05);
    CHECK(s.plan().i_max == 1.2);
    // Gains follow the nominal voltage.
    CHECK(s.kp == doctest::Approx(9.2 / (1.1 * 0.1)).epsilon(1e-12));
}

TEST_CASE("simulation keys override the integration setup") {
    const scenario s =
        parse_scenario("[sim]\ndt = 1e-4\nt_max = 2\nfreq_dep_reactance = false\n");
    CHECK(s.dt == 1e-4);
    CHECK(s.t_max == 2.0);
    CHECK_FALSE(s.freq_dep_reactance);
    CHECK_FALSE(s.plan().freq_dep_reactance);
}

TEST_CASE("events accept explicit current references") {
    const scenario s = parse_scenario(
        "[event]\nt = 1\nv_gcp = 0.14\ncurrent = explicit\ni_d = 0\ni_q = -1\n");
    REQUIRE(s.events.size() == 2);
    CHECK_FALSE(s.events[1].use_grid_code);
    CHECK(s.events[1].i_q == -1.0);
}

TEST_CASE("parse errors carry the offending line number") {
    const auto expect_error_at = [](const std::string& text, int line) {
        try {
            (void)parse_scenario(text);
            FAIL_CHECK("expected parse_error for: " << text);
        } catch (const parse_error& e) {
            CHECK(e.line() == line);
        }
    };
    expect_error_at("[grid]\nbogus = 1\n", 2);
    expect_error_at("[nope]\n", 1);
    expect_error_at("v_gn = 1\n", 1);                          // key outside a section
    expect_error_at("[grid]\nv_gn == 1\n", 2);                 // malformed number
    expect_error_at("[grid]\nv_gn\n", 2);                      // missing '='
    expect_error_at("[grid\nv_gn = 1\n", 1);                   // malformed header
    expect_error_at("[sim]\nfreq_dep_reactance = maybe\n", 2);
    expect_error_at("[pll]\nkind = pi\n", 2);
    expect_error_at("[pll]\nt_filter_s = 0.5\n", 2);           // outside [0.18, 0.24]
    expect_error_at("[pll]\nzeta = 0.5\n[pll]\nkp = 92\nki = 8464\n", 5);
    expect_error_at("[pll]\nkp = 92\n", 2);                    // ki missing
    expect_error_at("[pll]\nkp = 0\nki = 10\n", 3);
    expect_error_at("[event]\nv_gcp = 1\n", 1);                // t missing
    expect_error_at("[event]\nt = 1\n", 1);                    // v_gcp missing
    expect_error_at("[event]\nt = 1\nv_gcp = 0.5\ncurrent = explicit\n", 1);
    expect_error_at("[event]\nt = 1\nv_gcp = 0.5\ni_d = 1\n", 1);
    expect_error_at("[event]\nt = -1\nv_gcp = 0.5\n", 1);
    expect_error_at(
        "[event]\nt = 2\nv_gcp = 0.5\n\n[event]\nt = 1\nv_gcp = 1\n", 5);
    expect_error_at("[event]\nt = 2\nv_gcp = 0.5\ncurrent = both\n", 4);
}

TEST_CASE("comments and whitespace are ignored") {
    const scenario s = parse_scenario(
        "# leading comment\n  [grid]  \n  v_gn = 1.05  # trailing comment\n\n");
    CHECK(s.v_gn == 1.05);
}

TEST_CASE("adaptive scenarios warn about unsafe switch thresholds") {
    const scenario quiet = parse_scenario("[pll]\nkind = adaptive\n");
    CHECK(quiet.warnings.empty());
    const scenario too_high =
        parse_scenario("[pll]\nkind = adaptive\nrocof_switch_hzps = 50\n");
    REQUIRE(too_high.warnings.size() == 1);
    CHECK(too_high.warnings[0].find("exceeds") != std::string::npos);
    const scenario too_low =
        parse_scenario("[pll]\nkind = adaptive\nrocof_switch_hzps = 1\n");
    REQUIRE(too_low.warnings.size() == 1);
    CHECK(too_low.warnings[0].find("below") != std::string::npos);
    // The plain loop never consults the detector, so no advisory applies.
    const scenario srf = parse_scenario("[pll]\nrocof_switch_hzps = 50\n");
    CHECK(srf.warnings.empty());
}

TEST_CASE("serialization round-trips exactly") {
    const std::string text =
        "[grid]\nv_gn = 1.03\nf_gn_hz = 60\nf_g_offset_hz = 0.3\nx_line = 0.31\n"
        "r_line = 0.07\ni_max = 1.15\n"
        "[pll]\nkind = adaptive\nzeta = 0.62\nt_s = 0.13\nf_dev_max_hz = 4\n"
        "rocof_switch_hzps = 6\nrocof_return_hzps = 0.4\nt_filter_s = 0.21\n"
        "[sim]\ndt = 7e-5\nt_max = 3.5\nfreq_dep_reactance = false\n"
        "[event]\nt = 1.1\nv_gcp = 0.2\ncurrent = explicit\ni_d = 0.1\ni_q = -0.9\n"
        "[event]\nt = 2.2\nv_gcp = 1\n";
    const scenario first = parse_scenario(text);
    const std::string canon = serialize_scenario(first);
    const scenario second = parse_scenario(canon);
    CHECK(serialize_scenario(second) == canon);
    CHECK(second.kp == first.kp);
    CHECK(second.ki == first.ki);
    CHECK(second.events.size() == first.events.size());
}

TEST_CASE("random scenarios serialize to a fixed point") {
    std::mt19937 rng(20240815);
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    std::uniform_int_distribution<int> kind_pick(0, 3);
    std::uniform_int_distribution<int> event_count(0, 4);
    for (int i = 0; i < 100; ++i) {
        scenario s;
        s.v_gn = 0.5 + unit(rng);
        s.f_gn_hz = 40.0 + 20.0 * unit(rng);
        s.f_g_offset_hz = unit(rng) - 0.5;
        s.x_line = unit(rng);
        s.r_line = unit(rng);
        s.i_max = 0.5 + unit(rng);
        s.kind = static_cast<pll_kind>(kind_pick(rng));
        s.kp = 200.0 * unit(rng);
        s.ki = s.kind == pll_kind::first_order ? 0.0 : 1e4 * unit(rng);
        s.ki0 = 1e4 * unit(rng);
        s.f_dev_max_hz = 1.0 + 9.0 * unit(rng);
        s.rocof_switch_hzps = 2.5 + 5.0 * unit(rng);
        s.rocof_return_hzps = 0.4 * unit(rng) + 0.1;
        s.t_filter_s = 0.18 + 0.06 * unit(rng);
        s.dt = 1e-5 + 1e-4 * unit(rng);
        s.t_max = 1.0 + 5.0 * unit(rng);
        s.freq_dep_reactance = unit(rng) > 0.5;
        s.events.push_back(scenario_event{});
        const int extra = event_count(rng);
        double t = 0.0;
        for (int k = 0; k < extra; ++k) {
            scenario_event e;
            t += 0.25 + unit(rng);
            e.t = t;
            e.v_gcp = unit(rng);
            e.use_grid_code = unit(rng) > 0.5;
            if (!e.use_grid_code) {
                e.i_d = unit(rng);
                e.i_q = -unit(rng);
            }
            s.events.push_back(e);
        }
        const std::string canon = serialize_scenario(s);
        const scenario back = parse_scenario(canon);
        CHECK(serialize_scenario(back) == canon);
    }
}

TEST_CASE("missing scenario file raises an I/O error") {
    CHECK_THROWS_AS((void)load_scenario("/nonexistent/path.scn"), std::exception);
}

TEST_CASE("CSV number format is stable and compact") {
    CHECK(csv_number(0.1) == "0.1");
    CHECK(csv_number(-2.5) == "-2.5");
    CHECK(csv_number(1.0 / 3.0) == "0.333333333");
    CHECK(csv_number(0.283794109449) == "0.283794109");
    CHECK(csv_number(1e-10) == "1e-10");
    CHECK(csv_number(0.0) == "0");
    CHECK(csv_number(std::nan("")) == "nan");
}

TEST_CASE("timeseries and summary writers produce the documented shape") {
    const scenario s = parse_scenario(
        "[pll]\nzeta = 1.5\n[sim]\nt_max = 1\n"
        "[event]\nt = 0.4\nv_gcp = 0.14\ncurrent = explicit\ni_d = 0\ni_q = -1\n"
        "[event]\nt = 0.8\nv_gcp = 1\n");
    const run_plan plan = s.plan();
    const trajectory traj = integrate(plan, s.setup(), s.dt, s.t_max);

    const std::string csv_path = "test_out_timeseries.csv";
    write_timeseries(csv_path, plan, traj);
    std::ifstream csv(csv_path);
    REQUIRE(csv.good());
    std::string line;
    std::getline(csv, line);
    CHECK(line == "# schema=1");
    std::getline(csv, line);
    CHECK(line.rfind("# omega_dev", 0) == 0);
    std::getline(csv, line);
    CHECK(line ==
          "t_s,delta_rad,omega_dev_rad_s,v_pccq_pu,mode,ki_active,rocof_hz_s,"
          "i_d_pu,i_q_pu,v_gcp_pu,phi_deg");
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
    }
    CHECK(rows == traj.samples.size());
    csv.close();

    const std::string summary_path = "test_out_summary.txt";
    write_summary(summary_path, plan, traj);
    std::ifstream summary(summary_path);
    REQUIRE(summary.good());
    std::stringstream buffer;
    buffer << summary.rdbuf();
    const std::string text = buffer.str();
    CHECK(text.find("classification: ") != std::string::npos);
    CHECK(text.find("segment 1:") != std::string::npos);
    CHECK(text.find("min_fault_voltage_pu: 0.1\n") != std::string::npos);
    CHECK(text.find("sep_rad: -0.795602953") != std::string::npos);
    CHECK(text.find("fault_window_phi_deg: ") != std::string::npos);
    summary.close();
    std::remove(csv_path.c_str());
    std::remove(summary_path.c_str());
}

TEST_CASE("per-segment analysis tracks each equilibrium context") {
    const scenario s = parse_scenario(
        "[pll]\nzeta = 1.5\n[sim]\nt_max = 2\n"
        "[event]\nt = 0.4\nv_gcp = 0.14\ncurrent = explicit\ni_d = 0\ni_q = -1\n"
        "[event]\nt = 0.8\nv_gcp = 1\n");
    const run_plan plan = s.plan();
    const trajectory traj = integrate(plan, s.setup(), s.dt, s.t_max);
    const std::vector<segment_report> reports = analyze_segments(plan, traj);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].verdict == classification::converged);
    CHECK(reports[0].eq.sep == doctest::Approx(0.283794109).epsilon(1e-9));
    CHECK(reports[1].eq.sep == doctest::Approx(-0.795602953).epsilon(1e-9));
    CHECK_FALSE(reports[1].crossed);
    CHECK(reports[1].t_end == 0.8);
    CHECK(reports[2].verdict == classification::converged);
    CHECK(reports[2].min_voltage == doctest::Approx(0.28).epsilon(1e-12));
}

TEST_CASE("fault-window phase diagnostic") {
    SUBCASE("no fault segment means no reading") {
        const scenario s = parse_scenario("[sim]\nt_max = 1\n");
        const run_plan plan = s.plan();
        const trajectory traj = integrate(plan, s.setup(), s.dt, s.t_max);
        CHECK_FALSE(mean_fault_phi_deg(plan, traj).has_value());
    }
    SUBCASE("zero injection during the fault means no reading") {
        const scenario s = parse_scenario(
            "[sim]\nt_max = 1\n"
            "[event]\nt = 0.4\nv_gcp = 0.5\ncurrent = explicit\ni_d = 0\ni_q = 0\n");
        const run_plan plan = s.plan();
        const trajectory traj = integrate(plan, s.setup(), s.dt, s.t_max);
        CHECK_FALSE(mean_fault_phi_deg(plan, traj).has_value());
        // The CSV column degrades to NaN rather than a fake angle.
        CHECK(std::isnan(sample_phi_deg(traj.samples.back(), plan.grid,
                                        plan.freq_dep_reactance)));
    }
    SUBCASE("pure reactive injection reads close to quadrature") {
        const scenario s = parse_scenario(
            "[pll]\nzeta = 1.5\n[sim]\nt_max = 2\n"
            "[event]\nt = 0.5\nv_gcp = 0.14\ncurrent = explicit\ni_d = 0\ni_q = -1\n");
        const run_plan plan = s.plan();
        const trajectory traj = integrate(plan, s.setup(), s.dt, s.t_max);
        const std::optional<double> phi = mean_fault_phi_deg(plan, traj);
        REQUIRE(phi.has_value());
        CHECK(*phi == doctest::Approx(90.0).epsilon(0.05));
    }
}
