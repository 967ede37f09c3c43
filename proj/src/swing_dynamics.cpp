#include "pllsim/swing_dynamics.hpp"

#include <cmath>
#include <limits>

#include "pllsim/errors.hpp"

namespace pllsim {

namespace {

constexpr double kMaxStep = 2e-4;          // resolves the fastest loop ~1/kp
constexpr double kConvergedDeltaTol = 1e-2;   // rad
constexpr double kConvergedRateTol = 5e-2;    // rad/s
constexpr double kConvergedWindow = 0.5;      // s
constexpr double kUepMargin = 0.05;           // rad

struct stage_context {
    const current_ref* ref = nullptr;
    double v_gcp = 1.0;
    const grid_params* grid = nullptr;
    const pll_design* design = nullptr;
    bool freq_dep = true;
    double ki_active = 0.0;
    bool frozen = false;
    double frozen_domega = 0.0;
};

struct derivs {
    double d_delta = 0.0;
    double d_xi = 0.0;
};

derivs eval_rhs(const stage_context& ctx, double delta, double xi) {
    if (ctx.frozen) {
        return {ctx.frozen_domega - ctx.grid->delta_omega_grid(), 0.0};
    }
    swing_state s{delta, xi, 0.0};
    const loop_output out =
        delta_dot(s, *ctx.ref, ctx.v_gcp, *ctx.grid, *ctx.design, ctx.freq_dep);
    // Conditional anti-windup: the integrator holds while the limit is active.
    const double d_xi = out.saturated ? 0.0 : ctx.ki_active * out.v_pccq;
    return {out.delta_dot, d_xi};
}

loop_output frozen_output(const swing_state& state, const current_ref& ref, double v_gcp,
                          const grid_params& grid, double frozen_domega, bool freq_dep) {
    loop_output out;
    out.delta_omega = frozen_domega;
    out.delta_dot = frozen_domega - grid.delta_omega_grid();
    const double domega_for_x = freq_dep ? frozen_domega : 0.0;
    out.v_pccq = ref.i_d * (grid.omega_gn + domega_for_x) * grid.l_line() +
                 ref.i_q * grid.r_line - v_gcp * std::sin(state.delta);
    out.saturated = false;
    return out;
}

void validate_plan(const run_plan& plan, double h) {
    if (!(h > 0.0) || h > kMaxStep) {
        throw model_error("integration step must lie in (0, 2e-4] s");
    }
    if (plan.segments.empty()) {
        throw model_error("run plan needs at least one segment");
    }
    if (std::fabs(plan.segments.front().t_start) > 1e-12) {
        throw model_error("first segment must start at t = 0");
    }
    for (std::size_t i = 1; i < plan.segments.size(); ++i) {
        if (plan.segments[i].t_start <= plan.segments[i - 1].t_start) {
            throw model_error("segments must be strictly increasing in time");
        }
    }
}

}  // namespace

bool uep_crossed(const equilibrium_set& eq, double delta, double delta_dot_value) {
    switch (eq.kind) {
        case equilibrium_kind::pair:
            if (eq.uep < eq.sep) {
                return delta < eq.uep - kUepMargin && delta_dot_value < 0.0;
            }
            return delta > eq.uep + kUepMargin && delta_dot_value > 0.0;
        case equilibrium_kind::single:
            if (eq.sep < 0.0) {
                return delta < eq.sep - kUepMargin && delta_dot_value < 0.0;
            }
            return delta > eq.sep + kUepMargin && delta_dot_value > 0.0;
        case equilibrium_kind::none:
            return false;
    }
    return false;
}

loop_output delta_dot(const swing_state& state, const current_ref& ref, double v_gcp,
                      const grid_params& grid, const pll_design& design,
                      bool freq_dep_reactance) {
    const double l = grid.l_line();
    const double vq_nominal = ref.i_d * grid.omega_gn * l + ref.i_q * grid.r_line -
                              v_gcp * std::sin(state.delta);
    double domega;
    if (freq_dep_reactance) {
        const double den = 1.0 - design.kp * ref.i_d * l;
        if (den <= 0.0) {
            throw model_error("positive-feedback loop gain >= 1 (kp * i_d * l_line)");
        }
        domega = (design.kp * vq_nominal + state.xi) / den;
    } else {
        domega = design.kp * vq_nominal + state.xi;
    }

    loop_output out;
    if (domega > design.delta_omega_max) {
        out.delta_omega = design.delta_omega_max;
        out.saturated = true;
    } else if (domega < -design.delta_omega_max) {
        out.delta_omega = -design.delta_omega_max;
        out.saturated = true;
    } else {
        out.delta_omega = domega;
    }
    out.delta_dot = out.delta_omega - grid.delta_omega_grid();
    out.v_pccq = freq_dep_reactance
                     ? vq_nominal + ref.i_d * out.delta_omega * l
                     : vq_nominal;
    return out;
}

double second_order_rhs(double delta, double delta_dot_value, const current_ref& ref,
                        double v_gcp, const grid_params& grid, const pll_design& design) {
    const double l = grid.l_line();
    const double den = 1.0 - design.kp * ref.i_d * l;
    if (den <= 0.0) {
        throw model_error("positive-feedback loop gain >= 1 (kp * i_d * l_line)");
    }
    const double vq = ref.i_d * (grid.omega_gn + delta_dot_value) * l +
                      ref.i_q * grid.r_line - v_gcp * std::sin(delta);
    return (design.ki * vq - design.kp * v_gcp * std::cos(delta) * delta_dot_value) / den;
}

trajectory integrate_from(const run_plan& plan, const pll_setup& setup, swing_state init,
                          double h, double t_max) {
    validate_plan(plan, h);
    const pll_design& design = setup.design;
    const grid_params& grid = plan.grid;

    std::size_t cur = 0;
    double v_gcp = plan.segments[0].v_gcp;
    current_ref ref = plan.segments[0].ref(plan.i_max);
    equilibrium_set eq_cur = equilibria(ref, v_gcp, grid);

    pll_mode mode = pll_mode::second_order;
    bool frozen = false;
    double frozen_domega = 0.0;
    rocof_detector detector;
    detector.t_filter = setup.t_filter;

    swing_state s = init;

    const auto ki_active_now = [&]() -> double {
        switch (design.kind) {
            case pll_kind::srf:
                return design.ki;
            case pll_kind::first_order:
                return 0.0;
            case pll_kind::adaptive:
                return mode == pll_mode::second_order ? design.ki0 : 0.0;
            case pll_kind::freeze:
                return frozen ? 0.0 : design.ki;
        }
        return design.ki;
    };
    const auto mode_tag_now = [&]() -> int {
        switch (design.kind) {
            case pll_kind::srf:
                return kModeSecondOrder;
            case pll_kind::first_order:
                return kModeFirstOrder;
            case pll_kind::adaptive:
                return mode == pll_mode::second_order ? kModeSecondOrder : kModeFirstOrder;
            case pll_kind::freeze:
                return frozen ? kModeFrozen : kModeSecondOrder;
        }
        return kModeSecondOrder;
    };
    const auto current_output = [&]() -> loop_output {
        return frozen ? frozen_output(s, ref, v_gcp, grid, frozen_domega,
                                      plan.freq_dep_reactance)
                      : delta_dot(s, ref, v_gcp, grid, design, plan.freq_dep_reactance);
    };

    trajectory traj;
    const long n_steps = std::lround(t_max / h);
    traj.samples.reserve(static_cast<std::size_t>(n_steps) + 1);

    loop_output out = current_output();
    // Seed the detector so the pre-existing frequency offset does not read as
    // an infinite rate on the first step.
    detector.prev_abs_domega = std::fabs(out.delta_omega);

    traj.samples.push_back({0.0, s.delta, out.delta_dot, out.v_pccq, mode_tag_now(),
                            ki_active_now(), detector.lpf_state, ref.i_d, ref.i_q, v_gcp,
                            out.delta_omega, s.xi});
    traj.metrics.peak_abs_delta_dot = std::fabs(out.delta_dot);

    for (long i = 0; i < n_steps; ++i) {
        const double t0 = static_cast<double>(i) * h;

        // Timeline events land on the first step boundary at or after their time.
        while (cur + 1 < plan.segments.size() &&
               plan.segments[cur + 1].t_start <= t0 + 0.25 * h) {
            const double v_old = v_gcp;
            ++cur;
            const double v_new = plan.segments[cur].v_gcp;
            if (design.kind == pll_kind::freeze) {
                if (!frozen && v_old >= 0.9 && v_new < 0.9) {
                    // Capture phase/frequency in the pre-fault context.
                    const loop_output pre =
                        delta_dot(s, ref, v_old, grid, design, plan.freq_dep_reactance);
                    frozen_domega = pre.delta_omega;
                    frozen = true;
                } else if (frozen && v_old < 0.9 && v_new >= 0.9) {
                    frozen = false;
                }
            }
            v_gcp = v_new;
            ref = plan.segments[cur].ref(plan.i_max);
            eq_cur = equilibria(ref, v_gcp, grid);
        }

        stage_context ctx{&ref, v_gcp, &grid, &design, plan.freq_dep_reactance,
                          ki_active_now(), frozen, frozen_domega};
        const derivs k1 = eval_rhs(ctx, s.delta, s.xi);
        const derivs k2 = eval_rhs(ctx, s.delta + 0.5 * h * k1.d_delta, s.xi + 0.5 * h * k1.d_xi);
        const derivs k3 = eval_rhs(ctx, s.delta + 0.5 * h * k2.d_delta, s.xi + 0.5 * h * k2.d_xi);
        const derivs k4 = eval_rhs(ctx, s.delta + h * k3.d_delta, s.xi + h * k3.d_xi);
        s.delta += h / 6.0 * (k1.d_delta + 2.0 * k2.d_delta + 2.0 * k3.d_delta + k4.d_delta);
        s.xi += h / 6.0 * (k1.d_xi + 2.0 * k2.d_xi + 2.0 * k3.d_xi + k4.d_xi);
        s.theta_gcp += grid.omega_g * h;

        const double t = static_cast<double>(i + 1) * h;
        if (!std::isfinite(s.delta) || !std::isfinite(s.xi)) {
            const sample& last = traj.samples.back();
            throw integration_diverged(last.t, last.delta,
                                       last.delta_dot + grid.delta_omega_grid());
        }

        out = current_output();
        const double rocof = detector.step(out.delta_omega, h);
        if (design.kind == pll_kind::adaptive) {
            mode = mode_switch(mode, rocof, setup.thresholds);
        }

        if (!traj.metrics.uep_cross_time && uep_crossed(eq_cur, s.delta, out.delta_dot)) {
            traj.metrics.uep_cross_time = t;
        }
        traj.metrics.peak_abs_delta_dot =
            std::max(traj.metrics.peak_abs_delta_dot, std::fabs(out.delta_dot));

        traj.samples.push_back({t, s.delta, out.delta_dot, out.v_pccq, mode_tag_now(),
                                ki_active_now(), rocof, ref.i_d, ref.i_q, v_gcp,
                                out.delta_omega, s.xi});
    }

    const segment& fin = plan.segments.back();
    const equilibrium_set eq_fin = equilibria(fin.ref(plan.i_max), fin.v_gcp, grid);
    if (eq_fin.kind == equilibrium_kind::none) {
        traj.verdict = classification::lost_synchronism;
        traj.metrics.final_delta_error = std::numeric_limits<double>::quiet_NaN();
        return traj;
    }
    traj.metrics.final_delta_error = std::fabs(s.delta - eq_fin.sep);

    const double window_start = t_max - kConvergedWindow;
    bool window_ok = true;
    for (const sample& smp : traj.samples) {
        if (smp.t <= window_start) {
            continue;
        }
        if (std::fabs(smp.delta - eq_fin.sep) >= kConvergedDeltaTol ||
            std::fabs(smp.delta_dot) >= kConvergedRateTol) {
            window_ok = false;
            break;
        }
    }
    if (window_ok) {
        traj.verdict = classification::converged;
    } else if (traj.metrics.uep_cross_time) {
        traj.verdict = classification::lost_synchronism;
    } else {
        traj.verdict = classification::undetermined;
    }
    return traj;
}

trajectory integrate(const run_plan& plan, const pll_setup& setup, double h, double t_max) {
    validate_plan(plan, h);
    const segment& first = plan.segments.front();
    const equilibrium_set eq0 = equilibria(first.ref(plan.i_max), first.v_gcp, plan.grid);
    if (eq0.kind == equilibrium_kind::none) {
        throw model_error("initial segment has no equilibrium; start from a viable operating point");
    }
    swing_state init;
    init.delta = eq0.sep;
    init.xi = setup.design.kind == pll_kind::first_order ? 0.0
                                                         : plan.grid.delta_omega_grid();
    return integrate_from(plan, setup, init, h, t_max);
}

classification classify(const trajectory& traj, const equilibrium_set& eq) {
    if (eq.kind == equilibrium_kind::none) {
        return classification::lost_synchronism;
    }
    if (traj.samples.empty()) {
        return classification::undetermined;
    }
    const double window_start = traj.samples.back().t - kConvergedWindow;
    bool window_ok = true;
    bool crossed = false;
    for (const sample& smp : traj.samples) {
        if (uep_crossed(eq, smp.delta, smp.delta_dot)) {
            crossed = true;
        }
        if (smp.t > window_start &&
            (std::fabs(smp.delta - eq.sep) >= kConvergedDeltaTol ||
             std::fabs(smp.delta_dot) >= kConvergedRateTol)) {
            window_ok = false;
        }
    }
    if (window_ok) {
        return classification::converged;
    }
    if (crossed) {
        return classification::lost_synchronism;
    }
    return classification::undetermined;
}

run_plan portrait_plan(const run_plan& plan) {
    const segment* held = &plan.segments.front();
    for (const segment& seg : plan.segments) {
        if (seg.v_gcp < 0.9) {
            held = &seg;
            break;
        }
    }
    run_plan held_plan;
    held_plan.grid = plan.grid;
    held_plan.i_max = plan.i_max;
    held_plan.freq_dep_reactance = plan.freq_dep_reactance;
    segment seg0 = *held;
    seg0.t_start = 0.0;
    held_plan.segments = {seg0};
    return held_plan;
}

swing_state portrait_init(const portrait_point& point, const segment& seg,
                          const run_plan& plan, const pll_setup& setup) {
    const grid_params& grid = plan.grid;
    const current_ref ref = seg.ref(plan.i_max);
    const double l = grid.l_line();
    const double den =
        plan.freq_dep_reactance ? 1.0 - setup.design.kp * ref.i_d * l : 1.0;
    if (den <= 0.0) {
        throw model_error("positive-feedback loop gain >= 1 (kp * i_d * l_line)");
    }
    const double vq_nominal = ref.i_d * grid.omega_gn * l + ref.i_q * grid.r_line -
                              seg.v_gcp * std::sin(point.delta);
    swing_state state;
    state.delta = point.delta;
    state.xi = (point.delta_dot + grid.delta_omega_grid()) * den -
               setup.design.kp * vq_nominal;
    return state;
}

std::vector<trajectory> phase_portrait(const run_plan& plan, const pll_setup& setup,
                                       const std::vector<portrait_point>& init_points,
                                       double h, double t_max) {
    const run_plan held = portrait_plan(plan);
    std::vector<trajectory> result;
    if (init_points.empty()) {
        // Fault-on condition: pre-fault SEP with a cleared integrator.
        const segment& first = plan.segments.front();
        const equilibrium_set eq0 =
            equilibria(first.ref(plan.i_max), first.v_gcp, plan.grid);
        if (eq0.kind == equilibrium_kind::none) {
            throw model_error("initial segment has no equilibrium; start from a viable operating point");
        }
        result.push_back(integrate_from(held, setup, {eq0.sep, 0.0, 0.0}, h, t_max));
        return result;
    }
    result.reserve(init_points.size());
    for (const portrait_point& point : init_points) {
        result.push_back(integrate_from(
            held, setup, portrait_init(point, held.segments.front(), plan, setup), h,
            t_max));
    }
    return result;
}

}  // namespace pllsim
