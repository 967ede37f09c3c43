#include "pllsim/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "pllsim/errors.hpp"

namespace pllsim {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kMinTFilter = 0.18;
constexpr double kMaxTFilter = 0.24;
constexpr double kMinRocofSwitch = 2.5;       // Hz/s, advisory floor
constexpr double kGridCodeStepInterval = 0.01; // s, half a nominal cycle

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& value, int line) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) {
            throw parse_error(line, "trailing characters after number '" + value + "'");
        }
        return parsed;
    } catch (const parse_error&) {
        throw;
    } catch (const std::exception&) {
        throw parse_error(line, "expected a number, got '" + value + "'");
    }
}

bool parse_flag(const std::string& value, int line) {
    if (value == "true") {
        return true;
    }
    if (value == "false") {
        return false;
    }
    throw parse_error(line, "expected true or false, got '" + value + "'");
}

pll_kind parse_kind(const std::string& value, int line) {
    if (value == "srf") {
        return pll_kind::srf;
    }
    if (value == "first_order") {
        return pll_kind::first_order;
    }
    if (value == "adaptive") {
        return pll_kind::adaptive;
    }
    if (value == "freeze") {
        return pll_kind::freeze;
    }
    throw parse_error(line, "unknown pll kind '" + value + "'");
}

enum class section { none, grid, pll, sim, event };

struct event_draft {
    int line = 0;
    std::optional<double> t;
    std::optional<double> v_gcp;
    bool explicit_current = false;
    std::optional<double> i_d;
    std::optional<double> i_q;
};

struct gain_spec {
    std::optional<double> zeta, t_s, kp, ki, ki0;
    int design_line = 0;  // last zeta/t_s key
    int gain_line = 0;    // last kp/ki key
};

void finish_event(std::vector<scenario_event>& events, const event_draft& draft) {
    if (!draft.t) {
        throw parse_error(draft.line, "event block is missing 't'");
    }
    if (!draft.v_gcp) {
        throw parse_error(draft.line, "event block is missing 'v_gcp'");
    }
    if (draft.explicit_current && (!draft.i_d || !draft.i_q)) {
        throw parse_error(draft.line, "current=explicit requires both i_d and i_q");
    }
    if (!draft.explicit_current && (draft.i_d || draft.i_q)) {
        throw parse_error(draft.line, "i_d/i_q are only valid with current=explicit");
    }
    if (*draft.t < 0.0) {
        throw parse_error(draft.line, "event times must be non-negative");
    }
    if (!events.empty() && *draft.t <= events.back().t) {
        throw parse_error(draft.line, "event times must be strictly increasing");
    }
    scenario_event event;
    event.t = *draft.t;
    event.v_gcp = *draft.v_gcp;
    event.use_grid_code = !draft.explicit_current;
    event.i_d = draft.i_d.value_or(0.0);
    event.i_q = draft.i_q.value_or(0.0);
    events.push_back(event);
}

std::string format_full(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace

grid_params scenario::grid() const {
    grid_params g;
    g.v_gn = v_gn;
    g.omega_gn = kTwoPi * f_gn_hz;
    g.omega_g = kTwoPi * (f_gn_hz + f_g_offset_hz);
    g.x_line_nom = x_line;
    g.r_line = r_line;
    return g;
}

pll_setup scenario::setup() const {
    pll_setup s;
    s.design.kp = kp;
    s.design.ki = ki;
    s.design.ki0 = ki0;
    s.design.delta_omega_max = kTwoPi * f_dev_max_hz;
    s.design.kind = kind;
    s.thresholds.rocof_1 = rocof_switch_hzps;
    s.thresholds.rocof_2 = rocof_return_hzps;
    s.t_filter = t_filter_s;
    return s;
}

run_plan scenario::plan() const {
    run_plan p;
    p.grid = grid();
    p.i_max = i_max;
    p.freq_dep_reactance = freq_dep_reactance;
    p.segments.reserve(events.size());
    for (const scenario_event& event : events) {
        segment seg;
        seg.t_start = event.t;
        seg.v_gcp = event.v_gcp;
        seg.use_grid_code = event.use_grid_code;
        seg.explicit_ref = current_ref{event.i_d, event.i_q, i_max};
        p.segments.push_back(seg);
    }
    return p;
}

scenario parse_scenario(const std::string& text) {
    scenario out;
    gain_spec gains;
    section current = section::none;
    event_draft draft;
    bool in_event = false;

    std::istringstream stream(text);
    std::string raw;
    int line = 0;
    while (std::getline(stream, raw)) {
        ++line;
        const auto comment = raw.find('#');
        if (comment != std::string::npos) {
            raw.erase(comment);
        }
        const std::string text_line = trim(raw);
        if (text_line.empty()) {
            continue;
        }

        if (text_line.front() == '[') {
            if (text_line.back() != ']') {
                throw parse_error(line, "malformed section header");
            }
            const std::string name = trim(text_line.substr(1, text_line.size() - 2));
            if (in_event) {
                finish_event(out.events, draft);
                draft = {};
                in_event = false;
            }
            if (name == "grid") {
                current = section::grid;
            } else if (name == "pll") {
                current = section::pll;
            } else if (name == "sim") {
                current = section::sim;
            } else if (name == "event") {
                current = section::event;
                in_event = true;
                draft.line = line;
            } else {
                throw parse_error(line, "unknown section [" + name + "]");
            }
            continue;
        }

        const auto eq_pos = text_line.find('=');
        if (eq_pos == std::string::npos) {
            throw parse_error(line, "expected key = value");
        }
        const std::string key = trim(text_line.substr(0, eq_pos));
        const std::string value = trim(text_line.substr(eq_pos + 1));
        if (key.empty() || value.empty()) {
            throw parse_error(line, "expected key = value");
        }

        switch (current) {
            case section::none:
                throw parse_error(line, "key '" + key + "' outside any section");
            case section::grid:
                if (key == "v_gn") {
                    out.v_gn = parse_number(value, line);
                } else if (key == "f_gn_hz") {
                    out.f_gn_hz = parse_number(value, line);
                } else if (key == "f_g_offset_hz") {
                    out.f_g_offset_hz = parse_number(value, line);
                } else if (key == "x_line") {
                    out.x_line = parse_number(value, line);
                } else if (key == "r_line") {
                    out.r_line = parse_number(value, line);
                } else if (key == "i_max") {
                    out.i_max = parse_number(value, line);
                } else {
                    throw parse_error(line, "unknown [grid] key '" + key + "'");
                }
                break;
            case section::pll:
                if (key == "kind") {
                    out.kind = parse_kind(value, line);
                } else if (key == "zeta") {
                    gains.zeta = parse_number(value, line);
                    gains.design_line = line;
                } else if (key == "t_s") {
                    gains.t_s = parse_number(value, line);
                    gains.design_line = line;
                } else if (key == "kp") {
                    gains.kp = parse_number(value, line);
                    gains.gain_line = line;
                } else if (key == "ki") {
                    gains.ki = parse_number(value, line);
                    gains.gain_line = line;
                } else if (key == "ki0") {
                    gains.ki0 = parse_number(value, line);
                } else if (key == "f_dev_max_hz") {
                    out.f_dev_max_hz = parse_number(value, line);
                } else if (key == "rocof_switch_hzps") {
                    out.rocof_switch_hzps = parse_number(value, line);
                } else if (key == "rocof_return_hzps") {
                    out.rocof_return_hzps = parse_number(value, line);
                } else if (key == "t_filter_s") {
                    out.t_filter_s = parse_number(value, line);
                    if (out.t_filter_s < kMinTFilter || out.t_filter_s > kMaxTFilter) {
                        throw parse_error(line, "t_filter_s must lie in [0.18, 0.24] s");
                    }
                } else {
                    throw parse_error(line, "unknown [pll] key '" + key + "'");
                }
                break;
            case section::sim:
                if (key == "dt") {
                    out.dt = parse_number(value, line);
                } else if (key == "t_max") {
                    out.t_max = parse_number(value, line);
                } else if (key == "freq_dep_reactance") {
                    out.freq_dep_reactance = parse_flag(value, line);
                } else {
                    throw parse_error(line, "unknown [sim] key '" + key + "'");
                }
                break;
            case section::event:
                if (key == "t") {
                    draft.t = parse_number(value, line);
                } else if (key == "v_gcp") {
                    draft.v_gcp = parse_number(value, line);
                } else if (key == "current") {
                    if (value == "grid_code") {
                        draft.explicit_current = false;
                    } else if (value == "explicit") {
                        draft.explicit_current = true;
                    } else {
                        throw parse_error(line, "current must be grid_code or explicit");
                    }
                } else if (key == "i_d") {
                    draft.i_d = parse_number(value, line);
                } else if (key == "i_q") {
                    draft.i_q = parse_number(value, line);
                } else {
                    throw parse_error(line, "unknown [event] key '" + key + "'");
                }
                break;
        }
    }
    if (in_event) {
        finish_event(out.events, draft);
    }

    const bool has_design = gains.zeta || gains.t_s;
    const bool has_gains = gains.kp || gains.ki;
    if (has_design && has_gains) {
        throw parse_error(std::max(gains.design_line, gains.gain_line),
                          "give either zeta/t_s or kp/ki, not both");
    }
    if (has_gains) {
        if (!gains.kp || !gains.ki) {
            throw parse_error(gains.gain_line, "kp and ki must be given together");
        }
        out.kp = *gains.kp;
        out.ki = out.kind == pll_kind::first_order ? 0.0 : *gains.ki;
        out.ki0 = gains.ki0.value_or(*gains.ki);
        if (out.kp <= 0.0) {
            throw parse_error(gains.gain_line, "kp must be positive");
        }
        if (out.ki < 0.0 || out.ki0 < 0.0) {
            throw parse_error(gains.gain_line, "ki must be non-negative");
        }
    } else {
        const double zeta = gains.zeta.value_or(1.5);
        const double t_s = gains.t_s.value_or(0.1);
        if (zeta <= 0.0 || t_s <= 0.0) {
            throw parse_error(gains.design_line, "zeta and t_s must be positive");
        }
        const pll_design d = gains_from_design(zeta, t_s, out.v_gn, out.kind);
        out.kp = d.kp;
        out.ki = d.ki;
        out.ki0 = gains.ki0.value_or(d.ki0);
    }

    if (out.events.empty()) {
        out.events.push_back(scenario_event{});  // t = 0, v = 1, grid code
    } else if (out.events.front().t != 0.0) {
        out.events.insert(out.events.begin(), scenario_event{});
    }

    if (out.kind == pll_kind::adaptive) {
        const double bound = rocof1_upper_bound(out.setup().design, out.grid(), out.i_max,
                                                kGridCodeStepInterval, out.t_filter_s);
        if (out.rocof_switch_hzps > bound) {
            std::ostringstream w;
            w << "rocof_switch_hzps = " << out.rocof_switch_hzps
              << " exceeds the grid-code-step immunity bound " << bound
              << " Hz/s; normal current steps may trigger the fast mode";
            out.warnings.push_back(w.str());
        }
        if (out.rocof_switch_hzps < kMinRocofSwitch) {
            std::ostringstream w;
            w << "rocof_switch_hzps = " << out.rocof_switch_hzps
              << " is below the advisory floor " << kMinRocofSwitch
              << " Hz/s; interconnection transients may trigger the fast mode";
            out.warnings.push_back(w.str());
        }
    }
    return out;
}

scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open scenario file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::string serialize_scenario(const scenario& s) {
    std::ostringstream out;
    out << "[grid]\n";
    out << "v_gn = " << format_full(s.v_gn) << "\n";
    out << "f_gn_hz = " << format_full(s.f_gn_hz) << "\n";
    out << "f_g_offset_hz = " << format_full(s.f_g_offset_hz) << "\n";
    out << "x_line = " << format_full(s.x_line) << "\n";
    out << "r_line = " << format_full(s.r_line) << "\n";
    out << "i_max = " << format_full(s.i_max) << "\n";
    out << "\n[pll]\n";
    const char* kind_name = "srf";
    switch (s.kind) {
        case pll_kind::srf: kind_name = "srf"; break;
        case pll_kind::first_order: kind_name = "first_order"; break;
        case pll_kind::adaptive: kind_name = "adaptive"; break;
        case pll_kind::freeze: kind_name = "freeze"; break;
    }
    out << "kind = " << kind_name << "\n";
    out << "kp = " << format_full(s.kp) << "\n";
    out << "ki = " << format_full(s.ki) << "\n";
    out << "ki0 = " << format_full(s.ki0) << "\n";
    out << "f_dev_max_hz = " << format_full(s.f_dev_max_hz) << "\n";
    out << "rocof_switch_hzps = " << format_full(s.rocof_switch_hzps) << "\n";
    out << "rocof_return_hzps = " << format_full(s.rocof_return_hzps) << "\n";
    out << "t_filter_s = " << format_full(s.t_filter_s) << "\n";
    out << "\n[sim]\n";
    out << "dt = " << format_full(s.dt) << "\n";
    out << "t_max = " << format_full(s.t_max) << "\n";
    out << "freq_dep_reactance = " << (s.freq_dep_reactance ? "true" : "false") << "\n";
    for (const scenario_event& event : s.events) {
        out << "\n[event]\n";
        out << "t = " << format_full(event.t) << "\n";
        out << "v_gcp = " << format_full(event.v_gcp) << "\n";
        if (event.use_grid_code) {
            out << "current = grid_code\n";
        } else {
            out << "current = explicit\n";
            out << "i_d = " << format_full(event.i_d) << "\n";
            out << "i_q = " << format_full(event.i_q) << "\n";
        }
    }
    return out.str();
}

}  // namespace pllsim
