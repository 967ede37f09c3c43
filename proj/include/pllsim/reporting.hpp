#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pllsim/critical_damping.hpp"
#include "pllsim/swing_dynamics.hpp"
#include "pllsim/system_model.hpp"

namespace pllsim {

// Fixed CSV number format: 9 significant digits, '.' decimal point,
// locale-independent. The basis of byte-reproducible output.
[[nodiscard]] std::string csv_number(double value);

// Angle between the reconstructed PCC voltage phasor and the injected current,
// degrees in (-180, 180]. The line reactance is evaluated at the PLL frequency
// when freq_dep_reactance is set. NaN when no current is injected.
[[nodiscard]] double sample_phi_deg(const sample& smp, const grid_params& grid,
                                    bool freq_dep_reactance);

// Mean phase angle over the second half of the last sub-0.9-pu segment; empty
// when the timeline has no such segment or no current flows there.
[[nodiscard]] std::optional<double> mean_fault_phi_deg(const run_plan& plan,
                                                       const trajectory& traj);

// Per-segment view of a finished run: the equilibrium context, whether the
// trajectory escaped past the UEP inside the segment, and the verdict of the
// segment's sample slice on its own.
struct segment_report {
    std::size_t index = 0;
    double t_start = 0.0;
    double t_end = 0.0;        // start of next segment, or end of run
    double v_gcp = 0.0;
    current_ref ref;
    equilibrium_set eq;
    double min_voltage = 0.0;  // sag level below which no equilibrium exists
    classification verdict = classification::undetermined;
    bool crossed = false;
    std::optional<double> cross_time;
};

[[nodiscard]] std::vector<segment_report> analyze_segments(const run_plan& plan,
                                                           const trajectory& traj);

[[nodiscard]] const char* classification_name(classification c);

// timeseries.csv: schema comment, unit comment, header row, one row per sample.
void write_timeseries(const std::string& path, const run_plan& plan,
                      const trajectory& traj);

// summary.txt: overall verdict, per-segment equilibria and verdicts, settling
// metrics, and the fault-window injection diagnostic.
void write_summary(const std::string& path, const run_plan& plan,
                   const trajectory& traj);

// portrait_<k>.csv files plus portrait_manifest.txt with equilibrium overlay
// coordinates; returns the file names written.
std::vector<std::string> write_portraits(const std::string& out_dir,
                                         const run_plan& plan,
                                         const std::vector<trajectory>& portraits);

// critical_zeta.csv with one row per search result.
void write_critical_zeta(const std::string& path,
                         const std::vector<critical_zeta_result>& results);

}  // namespace pllsim
