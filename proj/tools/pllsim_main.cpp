#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pllsim/critical_damping.hpp"
#include "pllsim/errors.hpp"
#include "pllsim/reporting.hpp"
#include "pllsim/scenario.hpp"
#include "pllsim/swing_dynamics.hpp"
#include "pllsim/system_model.hpp"

namespace {

namespace fs = std::filesystem;

pllsim::scenario load_or_default(const std::string& path) {
    pllsim::scenario s =
        path.empty() ? pllsim::parse_scenario("") : pllsim::load_scenario(path);
    for (const std::string& warning : s.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    return s;
}

int verdict_exit_code(pllsim::classification verdict) {
    switch (verdict) {
        case pllsim::classification::converged:
            return 0;
        case pllsim::classification::lost_synchronism:
            return 2;
        case pllsim::classification::undetermined:
            return 3;
    }
    return 3;
}

struct run_options {
    std::string scenario_path;
    std::string out_dir = ".";
    double dt = -1.0;     // <= 0: use the scenario's value
    double t_max = -1.0;  // <= 0: use the scenario's value
};

void apply_overrides(pllsim::scenario& s, const run_options& opts) {
    if (opts.dt > 0.0) {
        s.dt = opts.dt;
    }
    if (opts.t_max > 0.0) {
        s.t_max = opts.t_max;
    }
}

int cmd_simulate(const run_options& opts) {
    pllsim::scenario s = load_or_default(opts.scenario_path);
    apply_overrides(s, opts);
    const pllsim::run_plan plan = s.plan();
    const pllsim::trajectory traj = pllsim::integrate(plan, s.setup(), s.dt, s.t_max);
    fs::create_directories(opts.out_dir);
    pllsim::write_timeseries(opts.out_dir + "/timeseries.csv", plan, traj);
    pllsim::write_summary(opts.out_dir + "/summary.txt", plan, traj);
    std::cout << pllsim::classification_name(traj.verdict) << "\n";
    return verdict_exit_code(traj.verdict);
}

int cmd_portrait(const run_options& opts, const std::vector<std::string>& init_specs) {
    pllsim::scenario s = load_or_default(opts.scenario_path);
    apply_overrides(s, opts);
    std::vector<pllsim::portrait_point> points;
    points.reserve(init_specs.size());
    for (const std::string& spec : init_specs) {
        const auto comma = spec.find(',');
        if (comma == std::string::npos) {
            std::cerr << "error: --init expects 'delta,delta_dot', got '" << spec
                      << "'\n";
            return 1;
        }
        try {
            points.push_back({std::stod(spec.substr(0, comma)),
                              std::stod(spec.substr(comma + 1))});
        } catch (const std::exception&) {
            std::cerr << "error: --init expects 'delta,delta_dot', got '" << spec
                      << "'\n";
            return 1;
        }
    }
    const pllsim::run_plan plan = s.plan();
    const std::vector<pllsim::trajectory> portraits =
        pllsim::phase_portrait(plan, s.setup(), points, s.dt, s.t_max);
    fs::create_directories(opts.out_dir);
    const std::vector<std::string> files =
        pllsim::write_portraits(opts.out_dir, plan, portraits);
    for (const std::string& file : files) {
        std::cout << file << "\n";
    }
    return 0;
}

int cmd_critical_zeta(const run_options& opts, const std::vector<double>& ratios,
                      pllsim::zeta_search_options search) {
    if (opts.dt > 0.0) {
        search.h = opts.dt;
    }
    if (opts.t_max > 0.0) {
        search.t_max = opts.t_max;
    }
    std::vector<pllsim::critical_zeta_result> results;
    if (!ratios.empty()) {
        pllsim::grid_params grid;
        if (!opts.scenario_path.empty()) {
            grid = load_or_default(opts.scenario_path).grid();
        }
        results = pllsim::critical_zeta_curve(ratios, grid, search);
    } else if (!opts.scenario_path.empty()) {
        const pllsim::scenario s = load_or_default(opts.scenario_path);
        results.push_back(pllsim::critical_zeta(s.plan(), search));
    } else {
        std::cerr << "error: critical-zeta needs --ratios or --scenario\n";
        return 1;
    }
    fs::create_directories(opts.out_dir);
    pllsim::write_critical_zeta(opts.out_dir + "/critical_zeta.csv", results);
    for (const pllsim::critical_zeta_result& res : results) {
        std::cout << "ratio " << pllsim::csv_number(res.ratio) << ": ";
        if (res.status == pllsim::search_status::found) {
            std::cout << "zeta_crit " << pllsim::csv_number(res.zeta_crit)
                      << " bracket [" << pllsim::csv_number(res.bracket_lo) << ", "
                      << pllsim::csv_number(res.bracket_hi) << "]\n";
        } else {
            std::cout << "no convergence up to zeta_max\n";
        }
    }
    return 0;
}

struct bound_options {
    double v_gn = 1.0;
    double i_max = 1.0;
    double r_line = 0.02;
    double t_s = 0.1;
    double delta_t = 0.01;
    double t_filter = 0.2;
};

int cmd_bound(const bound_options& opts) {
    // Only kp matters for the bound; the damping ratio is immaterial.
    const pllsim::pll_design design =
        pllsim::gains_from_design(1.0, opts.t_s, opts.v_gn);
    pllsim::grid_params grid;
    grid.v_gn = opts.v_gn;
    grid.r_line = opts.r_line;
    const double bound = pllsim::rocof1_upper_bound(design, grid, opts.i_max,
                                                    opts.delta_t, opts.t_filter);
    std::cout << pllsim::csv_number(bound) << "\n";
    return 0;
}

int cmd_equilibria(const std::string& scenario_path) {
    const pllsim::scenario s = load_or_default(scenario_path);
    const pllsim::run_plan plan = s.plan();
    for (std::size_t k = 0; k < plan.segments.size(); ++k) {
        const pllsim::segment& seg = plan.segments[k];
        const pllsim::current_ref ref = seg.ref(plan.i_max);
        const pllsim::equilibrium_set eq =
            pllsim::equilibria(ref, seg.v_gcp, plan.grid);
        std::cout << "segment " << k << ": t_start " << pllsim::csv_number(seg.t_start)
                  << " s, v_gcp " << pllsim::csv_number(seg.v_gcp) << " pu, i_d "
                  << pllsim::csv_number(ref.i_d) << ", i_q "
                  << pllsim::csv_number(ref.i_q) << ", min_fault_voltage "
                  << pllsim::csv_number(pllsim::min_fault_voltage(ref, plan.grid))
                  << " pu, ";
        switch (eq.kind) {
            case pllsim::equilibrium_kind::none:
                std::cout << "equilibria none\n";
                break;
            case pllsim::equilibrium_kind::single:
                std::cout << "equilibria single, sep "
                          << pllsim::csv_number(eq.sep) << " rad\n";
                break;
            case pllsim::equilibrium_kind::pair:
                std::cout << "equilibria pair, sep " << pllsim::csv_number(eq.sep)
                          << " rad, uep " << pllsim::csv_number(eq.uep) << " rad\n";
                break;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transient-stability simulator for PLL-synchronized converters"};
    app.require_subcommand(1);

    run_options sim_opts;
    CLI::App* sim = app.add_subcommand(
        "simulate", "Integrate a fault timeline; writes timeseries.csv and summary.txt");
    sim->add_option("--scenario", sim_opts.scenario_path,
                    "Scenario file (omitted: default no-fault case)");
    sim->add_option("--out", sim_opts.out_dir, "Output directory");
    sim->add_option("--dt", sim_opts.dt, "Integration step override (s)");
    sim->add_option("--tmax", sim_opts.t_max, "Horizon override (s)");

    run_options por_opts;
    std::vector<std::string> init_specs;
    CLI::App* por = app.add_subcommand(
        "portrait", "Integrate the held fault condition from chosen initial points");
    por->add_option("--scenario", por_opts.scenario_path, "Scenario file");
    por->add_option("--out", por_opts.out_dir, "Output directory");
    por->add_option("--dt", por_opts.dt, "Integration step override (s)");
    por->add_option("--tmax", por_opts.t_max, "Horizon override (s)");
    por->add_option("--init", init_specs,
                    "Initial point 'delta_rad,delta_dot_rad_s' (repeatable)");

    run_options cz_opts;
    std::vector<double> ratios;
    pllsim::zeta_search_options search;
    CLI::App* cz = app.add_subcommand(
        "critical-zeta", "Search the smallest converging damping ratio");
    cz->add_option("--scenario", cz_opts.scenario_path,
                   "Scenario whose fault condition is searched");
    cz->add_option("--ratios", ratios,
                   "Voltage-ratio list for the canonical curve, e.g. 0.3,0.5,0.71")
        ->delimiter(',');
    cz->add_option("--out", cz_opts.out_dir, "Output directory");
    cz->add_option("--ts", search.t_s, "Settling time held fixed across trials (s)");
    cz->add_option("--zeta-init", search.zeta_init, "Starting damping ratio");
    cz->add_option("--coarse", search.coarse_step, "Coarse ascent step");
    cz->add_option("--tol", search.tol, "Bracket tolerance");
    cz->add_option("--zeta-max", search.zeta_max, "Give up beyond this ratio");
    cz->add_option("--dt", cz_opts.dt, "Trial integration step (s)");
    cz->add_option("--tmax", cz_opts.t_max, "Trial horizon (s)");

    bound_options b_opts;
    CLI::App* bnd = app.add_subcommand(
        "bound", "Print the ROCOF switch-threshold upper bound (Hz/s)");
    bnd->add_option("--v-gn", b_opts.v_gn, "Nominal voltage (pu)");
    bnd->add_option("--i-max", b_opts.i_max, "Converter current rating (pu)");
    bnd->add_option("--r-line", b_opts.r_line, "Line resistance (pu)");
    bnd->add_option("--ts", b_opts.t_s, "PLL settling time (s)");
    bnd->add_option("--delta-t", b_opts.delta_t, "Current-step rise interval (s)");
    bnd->add_option("--t-filter", b_opts.t_filter, "ROCOF filter time constant (s)");

    std::string eq_scenario;
    CLI::App* eqc = app.add_subcommand(
        "equilibria", "Print the equilibrium set of every timeline segment");
    eqc->add_option("--scenario", eq_scenario, "Scenario file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim) {
            return cmd_simulate(sim_opts);
        }
        if (*por) {
            return cmd_portrait(por_opts, init_specs);
        }
        if (*cz) {
            return cmd_critical_zeta(cz_opts, ratios, search);
        }
        if (*bnd) {
            return cmd_bound(b_opts);
        }
        if (*eqc) {
            return cmd_equilibria(eq_scenario);
        }
    } catch (const pllsim::parse_error& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 1;
    } catch (const pllsim::integration_diverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const pllsim::model_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
