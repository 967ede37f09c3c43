#include "pllsim/reporting.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pllsim {

namespace {

constexpr double kDegPerRad = 180.0 / kPi;

void require_good(const std::ofstream& out, const std::string& path) {
    if (!out.good()) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require_good(out, path);
    return out;
}

}  // namespace

std::string csv_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

double sample_phi_deg(const sample& smp, const grid_params& grid,
                      bool freq_dep_reactance) {
    const std::complex<double> current(smp.i_d, smp.i_q);
    if (std::abs(current) == 0.0) {
        return std::nan("");
    }
    const double x = freq_dep_reactance
                         ? (grid.omega_gn + smp.delta_omega) * grid.l_line()
                         : grid.x_line_nom;
    const std::complex<double> voltage =
        smp.v_gcp * std::exp(std::complex<double>(0.0, -smp.delta)) +
        std::complex<double>(grid.r_line, x) * current;
    double phi = (std::arg(voltage) - std::arg(current)) * kDegPerRad;
    if (phi <= -180.0) {
        phi += 360.0;
    } else if (phi > 180.0) {
        phi -= 360.0;
    }
    return phi;
}

std::vector<segment_report> analyze_segments(const run_plan& plan,
                                             const trajectory& traj) {
    std::vector<segment_report> reports;
    if (traj.samples.empty()) {
        return reports;
    }
    const double t_end_run = traj.samples.back().t;
    reports.reserve(plan.segments.size());
    for (std::size_t k = 0; k < plan.segments.size(); ++k) {
        const segment& seg = plan.segments[k];
        segment_report rep;
        rep.index = k;
        rep.t_start = seg.t_start;
        rep.t_end = k + 1 < plan.segments.size() ? plan.segments[k + 1].t_start
                                                 : t_end_run;
        rep.v_gcp = seg.v_gcp;
        rep.ref = seg.ref(plan.i_max);
        rep.eq = equilibria(rep.ref, seg.v_gcp, plan.grid);
        rep.min_voltage = min_fault_voltage(rep.ref, plan.grid);

        trajectory slice;
        for (const sample& smp : traj.samples) {
            if (smp.t < rep.t_start || smp.t > rep.t_end) {
                continue;
            }
            slice.samples.push_back(smp);
            if (!rep.crossed && uep_crossed(rep.eq, smp.delta, smp.delta_dot)) {
                rep.crossed = true;
                rep.cross_time = smp.t;
            }
        }
        rep.verdict = classify(slice, rep.eq);
        reports.push_back(rep);
    }
    return reports;
}

std::optional<double> mean_fault_phi_deg(const run_plan& plan, const trajectory& traj) {
    if (traj.samples.empty()) {
        return std::nullopt;
    }
    const segment* fault = nullptr;
    double t_end = traj.samples.back().t;
    for (std::size_t k = 0; k < plan.segments.size(); ++k) {
        if (plan.segments[k].v_gcp < 0.9) {
            fault = &plan.segments[k];
            t_end = k + 1 < plan.segments.size() ? plan.segments[k + 1].t_start
                                                 : traj.samples.back().t;
        }
    }
    if (fault == nullptr) {
        return std::nullopt;
    }
    const double t_mid = 0.5 * (fault->t_start + t_end);
    double sum = 0.0;
    std::size_t count = 0;
    for (const sample& smp : traj.samples) {
        if (smp.t < t_mid || smp.t > t_end) {
            continue;
        }
        const double phi = sample_phi_deg(smp, plan.grid, plan.freq_dep_reactance);
        if (std::isnan(phi)) {
            continue;
        }
        sum += phi;
        ++count;
    }
    if (count == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(count);
}

const char* classification_name(classification c) {
    switch (c) {
        case classification::converged:
            return "Converged";
        case classification::lost_synchronism:
            return "LostSynchronism";
        case classification::undetermined:
            return "Undetermined";
    }
    return "Undetermined";
}

void write_timeseries(const std::string& path, const run_plan& plan,
                      const trajectory& traj) {
    std::ofstream out = open_out(path);
    out << "# schema=1\n";
    out << "# omega_dev_rad_s in rad/s, rocof_hz_s in Hz/s, phi_deg in degrees\n";
    out << "t_s,delta_rad,omega_dev_rad_s,v_pccq_pu,mode,ki_active,rocof_hz_s,"
           "i_d_pu,i_q_pu,v_gcp_pu,phi_deg\n";
    for (const sample& smp : traj.samples) {
        out << csv_number(smp.t) << ',' << csv_number(smp.delta) << ','
            << csv_number(smp.delta_dot) << ',' << csv_number(smp.v_pccq) << ','
            << smp.mode << ',' << csv_number(smp.ki_active) << ','
            << csv_number(smp.rocof_hz_s) << ',' << csv_number(smp.i_d) << ','
            << csv_number(smp.i_q) << ',' << csv_number(smp.v_gcp) << ','
            << csv_number(sample_phi_deg(smp, plan.grid, plan.freq_dep_reactance))
            << '\n';
    }
    require_good(out, path);
}

void write_summary(const std::string& path, const run_plan& plan,
                   const trajectory& traj) {
    std::ofstream out = open_out(path);
    out << "classification: " << classification_name(traj.verdict) << "\n";
    if (traj.metrics.uep_cross_time) {
        out << "uep_cross_time_s: " << csv_number(*traj.metrics.uep_cross_time) << "\n";
    } else {
        out << "uep_cross_time_s: none\n";
    }
    out << "final_delta_rad: "
        << (traj.samples.empty() ? "n/a" : csv_number(traj.samples.back().delta))
        << "\n";
    out << "final_delta_error_rad: " << csv_number(traj.metrics.final_delta_error)
        << "\n";
    out << "peak_abs_delta_dot_rad_s: " << csv_number(traj.metrics.peak_abs_delta_dot)
        << "\n";

    const std::vector<segment_report> reports = analyze_segments(plan, traj);
    for (const segment_report& rep : reports) {
        out << "\nsegment " << rep.index << ":\n";
        out << "  t_start_s: " << csv_number(rep.t_start) << "\n";
        out << "  v_gcp_pu: " << csv_number(rep.v_gcp) << "\n";
        out << "  i_d_pu: " << csv_number(rep.ref.i_d) << "\n";
        out << "  i_q_pu: " << csv_number(rep.ref.i_q) << "\n";
        out << "  min_fault_voltage_pu: " << csv_number(rep.min_voltage) << "\n";
        switch (rep.eq.kind) {
            case equilibrium_kind::none:
                out << "  equilibria: none\n";
                break;
            case equilibrium_kind::single:
                out << "  equilibria: single\n";
                out << "  sep_rad: " << csv_number(rep.eq.sep) << "\n";
                break;
            case equilibrium_kind::pair:
                out << "  equilibria: pair\n";
                out << "  sep_rad: " << csv_number(rep.eq.sep) << "\n";
                out << "  uep_rad: " << csv_number(rep.eq.uep) << "\n";
                break;
        }
        out << "  classification: " << classification_name(rep.verdict) << "\n";
        if (rep.cross_time) {
            out << "  uep_cross_time_s: " << csv_number(*rep.cross_time) << "\n";
        }
    }

    out << "\nfault_window_phi_deg: ";
    const std::optional<double> phi = mean_fault_phi_deg(plan, traj);
    if (phi) {
        out << csv_number(*phi) << "\n";
        out << "reactive_current_fraction: "
            << csv_number(std::sin(*phi / kDegPerRad)) << "\n";
    } else {
        out << "n/a\n";
        out << "reactive_current_fraction: n/a\n";
    }
    require_good(out, path);
}

std::vector<std::string> write_portraits(const std::string& out_dir,
                                         const run_plan& plan,
                                         const std::vector<trajectory>& portraits) {
    std::vector<std::string> files;
    const run_plan held = portrait_plan(plan);
    const segment& seg = held.segments.front();
    const equilibrium_set eq = equilibria(seg.ref(held.i_max), seg.v_gcp, held.grid);

    for (std::size_t k = 0; k < portraits.size(); ++k) {
        const std::string name = "portrait_" + std::to_string(k) + ".csv";
        const std::string path = out_dir + "/" + name;
        std::ofstream out = open_out(path);
        out << "# schema=1\n";
        out << "delta_rad,delta_dot_rad_s\n";
        for (const sample& smp : portraits[k].samples) {
            out << csv_number(smp.delta) << ',' << csv_number(smp.delta_dot) << '\n';
        }
        require_good(out, path);
        files.push_back(name);
    }

    const std::string manifest_path = out_dir + "/portrait_manifest.txt";
    std::ofstream out = open_out(manifest_path);
    out << "held_v_gcp_pu: " << csv_number(seg.v_gcp) << "\n";
    out << "held_i_d_pu: " << csv_number(seg.ref(held.i_max).i_d) << "\n";
    out << "held_i_q_pu: " << csv_number(seg.ref(held.i_max).i_q) << "\n";
    switch (eq.kind) {
        case equilibrium_kind::none:
            out << "equilibria: none\n";
            break;
        case equilibrium_kind::single:
            out << "equilibria: single\n";
            out << "sep_rad: " << csv_number(eq.sep) << "\n";
            break;
        case equilibrium_kind::pair:
            out << "equilibria: pair\n";
            out << "sep_rad: " << csv_number(eq.sep) << "\n";
            out << "uep_rad: " << csv_number(eq.uep) << "\n";
            break;
    }
    for (std::size_t k = 0; k < portraits.size(); ++k) {
        out << "portrait_" << k
            << ": " << classification_name(portraits[k].verdict) << "\n";
    }
    require_good(out, manifest_path);
    files.push_back("portrait_manifest.txt");
    return files;
}

void write_critical_zeta(const std::string& path,
                         const std::vector<critical_zeta_result>& results) {
    std::ofstream out = open_out(path);
    out << "# schema=1\n";
    out << "ratio,zeta_crit,bracket_lo,bracket_hi,status\n";
    for (const critical_zeta_result& res : results) {
        out << csv_number(res.ratio) << ',' << csv_number(res.zeta_crit) << ','
            << csv_number(res.bracket_lo) << ',' << csv_number(res.bracket_hi) << ','
            << (res.status == search_status::found ? "found" : "no_convergence")
            << '\n';
    }
    require_good(out, path);
}

}  // namespace pllsim
