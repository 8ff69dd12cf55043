// Copyright 2026 The qfictl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qfictl/cli/config.hpp"
#include "qfictl/qfictl.hpp"

namespace qfictl::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Column {
    std::string name;
    std::string doc;
};

struct Table {
    Scenario scenario = Scenario::ControlledQFI;
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::json details = nlohmann::json::object();
};

struct RunOptions {
    std::size_t threads = 1;
    /// Multiplies every grid size; used by the golden degradation check.
    double step_scale = 1.0;
};

/// Worker count: hardware concurrency capped by QFI_THREADS when set.
inline std::size_t thread_budget() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("QFI_THREADS")) {
        char *end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && cap >= 1) {
            n = std::min<std::size_t>(n, cap);
        }
    }
    return n;
}

/// Evaluates f(0..n-1) on up to `threads` workers; results keep index order.
template <class F>
auto parallel_map(std::size_t n, std::size_t threads, F f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    std::vector<R> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) {
            std::rethrow_exception(errors[i]);
        }
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

namespace detail {

inline double rel_err(double value, double reference) {
    return std::abs(value - reference) / std::abs(reference);
}

inline Cell num(double v) {
    return v;
}
inline Cell integer(std::size_t v) {
    return static_cast<std::int64_t>(v);
}

inline Table upper_bound_sweep(const ScenarioConfig &cfg, const RunOptions &opt) {
    const ParametricModel model = make_rotating_qubit(cfg.model_config());
    const double g = cfg.parameter();
    Table t;
    t.columns = {{"T", "total evolution time"},
                 {"steps", "grid steps"},
                 {"upper_bound_qfi", "squared integral of the spectral gap of dH/dg"},
                 {"analytic", "B^2 T^4 (frequency) or 4 T^2 (amplitude)"},
                 {"rel_err", "|upper_bound_qfi - analytic| / analytic"}};
    t.rows = parallel_map(cfg.T.size(), opt.threads, [&](std::size_t i) {
        const double T = cfg.T[i];
        const TimeGrid grid(T, cfg.steps_for(T, opt.step_scale));
        const double ub = upper_bound_qfi(model, g, grid);
        const double analytic = cfg.estimand == Estimand::Frequency ? cfg.B * cfg.B * std::pow(T, 4) : 4.0 * T * T;
        return std::vector<Cell>{T, integer(grid.steps()), ub, analytic, rel_err(ub, analytic)};
    });
    return t;
}

inline Table no_control_sweep(const ScenarioConfig &cfg, const RunOptions &opt) {
    const ParametricModel model = make_rotating_qubit(cfg.model_config());
    const double w = cfg.omega, B = cfg.B;
    Table t;
    t.columns = {{"T", "total evolution time"},
                 {"steps", "grid steps"},
                 {"optimal_qfi", "(tau_max - tau_min)^2 of h(T) driven by H alone"},
                 {"asymptote", "4 B^2 T^2 / (4 B^2 + omega^2)"},
                 {"ratio", "optimal_qfi / asymptote"},
                 {"upper_bound_qfi", "B^2 T^4 bound for comparison"},
                 {"tau_max", "largest eigenvalue of h(T)"},
                 {"tau_min", "smallest eigenvalue of h(T)"}};
    t.rows = parallel_map(cfg.T.size(), opt.threads, [&](std::size_t i) {
        const double T = cfg.T[i];
        const TimeGrid grid(T, cfg.steps_for(T, opt.step_scale));
        const HermitianOperator h =
            generator_integral(model, w, [&](double s) { return model.hamiltonian(w, s); }, grid);
        const OptimalQfi q = optimal_qfi(h);
        const double asym = 4.0 * B * B * T * T / (4.0 * B * B + w * w);
        return std::vector<Cell>{T,           integer(grid.steps()), q.value, asym, q.value / asym,
                                 upper_bound_qfi(model, w, grid), q.tau_max, q.tau_min};
    });
    return t;
}

inline Table controlled_qfi(const ScenarioConfig &cfg, const RunOptions &opt) {
    const ParametricModel model = make_rotating_qubit(cfg.model_config());
    const double g = cfg.parameter(), B = cfg.B;
    Table t;
    t.columns = {{"T", "total evolution time"},
                 {"detuning", "g_c - g"},
                 {"steps", "grid steps"},
                 {"optimal_qfi", "(tau_max - tau_min)^2 of h(T) under the controlled drive"},
                 {"upper_bound_qfi", "squared integral of the spectral gap of dH/dg"},
                 {"reference", "B^2 T^4 (1 - T^2 d^2 / 18) for frequency; 4 T^2 at d = 0 for amplitude; else nan"},
                 {"rel_to_reference", "|optimal_qfi - reference| / reference"},
                 {"tau_max", "largest eigenvalue of h(T)"},
                 {"tau_min", "smallest eigenvalue of h(T)"}};
    const std::size_t nd = cfg.detunings.size();
    t.rows = parallel_map(cfg.T.size() * nd, opt.threads, [&](std::size_t k) {
        const double T = cfg.T[k / nd];
        const double d = cfg.detunings[k % nd];
        const TimeGrid grid(T, cfg.steps_for(T, opt.step_scale));
        const HermitianOperator h = generator_integral(model, g, total_hamiltonian(model, g, {g + d, {}}, grid), grid);
        const OptimalQfi q = optimal_qfi(h);
        double ref = NAN;
        if (cfg.estimand == Estimand::Frequency) {
            ref = B * B * std::pow(T, 4) * (1.0 - T * T * d * d / 18.0);
        } else if (d == 0.0) {
            ref = 4.0 * T * T;
        }
        return std::vector<Cell>{T, d, integer(grid.steps()), q.value, upper_bound_qfi(model, g, grid), ref,
                                 std::isnan(ref) ? NAN : rel_err(q.value, ref), q.tau_max, q.tau_min};
    });
    return t;
}

inline Table expansion_fit(const ScenarioConfig &cfg, const RunOptions &opt) {
    const ParametricModel model = make_rotating_qubit(cfg.model_config());
    const double B = cfg.B, T = cfg.T[0];
    const TimeGrid grid(T, cfg.steps_for(T, opt.step_scale));
    const GeneratorExpansion ex = expand_generator(model, cfg.omega, grid, cfg.detunings, cfg.degree);
    Table t;
    t.columns = {{"quantity", "fitted series: Pauli component I/x/y/z of h(T), half_gap = (tau_max - tau_min)/2, or qfi"},
                 {"power", "power of the detuning d = omega_c - omega"},
                 {"coefficient", "least-squares coefficient"},
                 {"std_error", "standard error of the coefficient"},
                 {"reference", "closed-form coefficient where known, else nan"},
                 {"rel_to_reference", "|coefficient - reference| / |reference|"}};
    auto reference = [&](const std::string &q, int p) -> double {
        if (q == "z" && p == 0) return -B * T * T / 2.0;
        if (q == "x" && p == 1) return -B * T * T * T / 3.0;
        if (q == "half_gap" && p == 0) return B * T * T / 2.0;
        if (q == "half_gap" && p == 2) return -B * std::pow(T, 4) / 72.0;
        if (q == "qfi" && p == 0) return B * B * std::pow(T, 4);
        if (q == "qfi" && p == 2) return -B * B * std::pow(T, 6) / 18.0;
        return NAN;
    };
    auto emit = [&](const std::string &q, const PolynomialFit &fit) {
        for (int p = 0; p <= cfg.degree; ++p) {
            const double c = fit.coefficients[static_cast<std::size_t>(p)];
            const double ref = reference(q, p);
            t.rows.push_back({q, static_cast<std::int64_t>(p), c, fit.standard_errors[static_cast<std::size_t>(p)], ref,
                              std::isnan(ref) ? NAN : rel_err(c, ref)});
        }
    };
    const char *names[4] = {"I", "x", "y", "z"};
    for (std::size_t k = 0; k < 4; ++k) {
        emit(names[k], ex.pauli_fit[k]);
    }
    emit("half_gap", ex.half_gap_fit);
    emit("qfi", ex.qfi_fit);
    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t i = 0; i < ex.deltas.size(); ++i) {
        samples.push_back({{"detuning", ex.deltas[i]},
                           {"components", ex.components[i]},
                           {"tau_max", ex.tau_max[i]},
                           {"tau_min", ex.tau_min[i]},
                           {"optimal_qfi", ex.optimal_qfi[i]}});
    }
    t.details["samples"] = samples;
    t.details["steps"] = grid.steps();
    return t;
}

inline Table frame_invariance(const ScenarioConfig &cfg, const RunOptions &opt) {
    const ParametricModel model = make_rotating_qubit(cfg.model_config());
    const double w = cfg.omega, w_c = cfg.omega + cfg.detuning, B = cfg.B;
    std::vector<double> times = cfg.T;
    for (int n : cfg.boundary_n) {
        times.push_back(boundary_times(w_c, n));
    }
    Table t;
    t.columns = {{"T", "total evolution time"},
                 {"steps", "grid steps"},
                 {"optimal_qfi", "optimal QFI under the controlled drive"},
                 {"optimal_qfi_prime", "optimal QFI under the transformed drive"},
                 {"optimal_rel_diff", "relative difference of the optimal QFIs"},
                 {"maximal_rel_diff", "relative difference of 4 Var h for the same initial state"},
                 {"upper_bound_rel_diff", "relative difference of the upper bounds"},
                 {"h_rel_diff", "||h' - h||_F / max(1, ||h||_F)"},
                 {"max_sigma_y", "max over the grid of |sigma_y component| of H'(t)"},
                 {"max_closed_form_dev", "max over the grid of |H'(t) - B(1 - cos dt) sx + B sin(dt) sz|, d = omega - omega_c"},
                 {"G_T_error", "||G(T) - I||_F"}};
    const FrameTransform frame = pauli_frame_linear(Pauli::Y, -0.5 * w_c);
    const Matrix sx = pauli(Pauli::X), sz = pauli(Pauli::Z);
    t.rows = parallel_map(times.size(), opt.threads, [&](std::size_t i) {
        const double T = times[i];
        const TimeGrid grid(T, cfg.steps_for(T, opt.step_scale));
        const ControlledDrive drive = make_controlled_drive(model, {w_c, {}}, grid);
        const FisherInvarianceReport r = fisher_invariance_check(model, w, drive.as_param_drive(), frame, grid);
        const DriveFn hp = transform_hamiltonian(drive.at(w), frame);
        double max_y = 0.0, max_dev = 0.0;
        const double d = w - w_c;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double s = grid.point(k);
            const Matrix m = hp(s).matrix();
            max_y = std::max(max_y, std::abs(pauli_components(m)[2]));
            const Matrix closed = B * (1.0 - std::cos(d * s)) * sx - B * std::sin(d * s) * sz;
            max_dev = std::max(max_dev, (m - closed).cwiseAbs().maxCoeff());
        }
        return std::vector<Cell>{T,
                                 integer(grid.steps()),
                                 r.optimal_qfi,
                                 r.optimal_qfi_prime,
                                 r.optimal_rel_diff,
                                 r.maximal_rel_diff,
                                 r.upper_bound_rel_diff,
                                 r.h_rel_diff,
                                 max_y,
                                 max_dev,
                                 check_boundaries(frame, T).final_error};
    });
    return t;
}

inline Table adaptive_run(const ScenarioConfig &cfg, const RunOptions &opt) {
    const ParametricModel model = make_rotating_qubit(cfg.model_config());
    const double g = cfg.parameter(), T = cfg.T[0];
    const TimeGrid grid(T, cfg.steps_for(T, opt.step_scale));
    Table t;
    t.columns = {{"run", "run index"},
                 {"seed", "RNG seed of the run"},
                 {"round", "round index"},
                 {"g_c", "control parameter used in the round"},
                 {"mean", "sample mean of O"},
                 {"sample_variance", "sample variance of O"},
                 {"abs_delta", "arccos(mean) / gap integral"},
                 {"probe_g_c", "control parameter of the sign probe"},
                 {"probe_mean", "sample mean of O in the probe"},
                 {"sign", "resolved direction of g - g_c"},
                 {"estimate", "g_c + sign * abs_delta"},
                 {"g_next", "pooled estimate carried to the next round"},
                 {"abs_error", "|g_next - g|"}};
    const auto traces = parallel_map(cfg.runs, opt.threads, [&](std::size_t r) {
        AdaptiveOptions ao;
        ao.rounds = cfg.rounds;
        ao.shots = cfg.shots;
        ao.seed = cfg.seed + r;
        return adaptive_estimate(model, g, *cfg.g_c0, grid, ao);
    });
    double sum_err2 = 0.0;
    for (std::size_t r = 0; r < traces.size(); ++r) {
        for (std::size_t k = 0; k < traces[r].rounds.size(); ++k) {
            const RoundRecord &rec = traces[r].rounds[k];
            t.rows.push_back({integer(r), static_cast<std::int64_t>(traces[r].seed), integer(k), rec.g_c, rec.mean,
                              rec.sample_variance, rec.abs_delta, rec.probe_g_c, rec.probe_mean,
                              static_cast<std::int64_t>(rec.sign), rec.estimate, rec.g_next,
                              std::abs(rec.g_next - g)});
        }
        const double e = traces[r].final_estimate() - g;
        sum_err2 += e * e;
    }
    const double gap = traces.front().gap_integral;
    const double total = static_cast<double>(traces.front().total_shots());
    t.details["gap_integral"] = gap;
    t.details["total_shots_per_run"] = traces.front().total_shots();
    t.details["cramer_rao_bound"] = 1.0 / (total * gap * gap);
    t.details["mean_final_squared_error"] = sum_err2 / static_cast<double>(traces.size());
    t.details["steps"] = grid.steps();
    return t;
}

inline Table appendix_a_demo(const ScenarioConfig &cfg, const RunOptions &opt) {
    AppendixAParams p;
    p.B = cfg.B;
    p.omega = cfg.omega;
    p.omega_c = cfg.omega + cfg.detuning;
    p.formal_t_end = cfg.formal_T;
    p.boundary_index = cfg.boundary_n.front();
    p.formal_steps = static_cast<std::size_t>(std::max(10.0, std::round(cfg.formal_steps * opt.step_scale)));
    p.physical_steps = cfg.steps_for(boundary_times(p.omega_c, p.boundary_index), opt.step_scale);
    const AppendixAReport r = appendix_a_distinction(p);
    Table t;
    t.columns = {{"metric", "quantity"}, {"value", "value"}};
    t.rows = {{std::string("formal_population_diff"), r.formal_population_diff},
              {std::string("formal_state_diff"), r.formal_state_diff},
              {std::string("physical_max_interior_deficit"), r.physical_max_interior_deficit},
              {std::string("physical_endpoint_diff"), r.physical_endpoint_diff},
              {std::string("physical_t_end"), r.physical_t_end},
              {std::string("optimal_qfi"), r.optimal_qfi},
              {std::string("optimal_qfi_prime"), r.optimal_qfi_prime}};
    nlohmann::json trace = nlohmann::json::array();
    const std::size_t stride = std::max<std::size_t>(1, r.times.size() / 200);
    for (std::size_t i = 0; i < r.times.size(); i += stride) {
        trace.push_back({r.times[i], r.deficits[i]});
    }
    t.details["deficit_trace"] = trace;
    t.details["formal_steps"] = p.formal_steps;
    t.details["physical_steps"] = p.physical_steps;
    return t;
}

}  // namespace detail

inline Table run_scenario(const ScenarioConfig &cfg, const RunOptions &opt = {}) {
    Table t;
    switch (cfg.scenario) {
        case Scenario::UpperBoundSweep:
            t = detail::upper_bound_sweep(cfg, opt);
            break;
        case Scenario::NoControlSweep:
            t = detail::no_control_sweep(cfg, opt);
            break;
        case Scenario::ControlledQFI:
            t = detail::controlled_qfi(cfg, opt);
            break;
        case Scenario::ExpansionFit:
            t = detail::expansion_fit(cfg, opt);
            break;
        case Scenario::FrameInvariance:
            t = detail::frame_invariance(cfg, opt);
            break;
        case Scenario::AdaptiveRun:
            t = detail::adaptive_run(cfg, opt);
            break;
        case Scenario::AppendixADemo:
            t = detail::appendix_a_demo(cfg, opt);
            break;
    }
    t.scenario = cfg.scenario;
    return t;
}

inline std::string format_cell(const Cell &c) {
    if (const double *d = std::get_if<double>(&c)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const std::int64_t *i = std::get_if<std::int64_t>(&c)) {
        return std::to_string(*i);
    }
    return std::get<std::string>(c);
}

inline void write_csv(std::ostream &out, const Table &t) {
    out << "# qfictl " << kVersion << " scenario=" << scenario_name(t.scenario) << "\n";
    for (const Column &c : t.columns) {
        out << "#   " << c.name << ": " << c.doc << "\n";
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        out << (i ? "," : "") << t.columns[i].name;
    }
    out << "\n";
    for (const auto &row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << format_cell(row[i]);
        }
        out << "\n";
    }
}

inline std::string render_csv(const Table &t) {
    std::ostringstream s;
    write_csv(s, t);
    return s.str();
}

inline nlohmann::json table_json(const Table &t) {
    nlohmann::json cols = nlohmann::json::array();
    for (const Column &c : t.columns) {
        cols.push_back({{"name", c.name}, {"doc", c.doc}});
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto &row : t.rows) {
        nlohmann::json r = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::visit([&](const auto &v) { r[t.columns[i].name] = v; }, row[i]);
        }
        rows.push_back(std::move(r));
    }
    return {{"scenario", std::string(scenario_name(t.scenario))}, {"version", kVersion}, {"columns", cols},
            {"rows", rows}};
}

inline nlohmann::json config_json(const ScenarioConfig &cfg) {
    nlohmann::json entries = nlohmann::json::object();
    for (const ConfigEntry &e : cfg.entries) {
        entries[e.key] = {{"value", e.value}, {"line", e.line}};
    }
    return entries;
}

}  // namespace qfictl::cli
