#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcast/agents.hpp"
#include "bcast/lti.hpp"
#include "bcast/reference.hpp"

namespace bcast {

// ============================================================================
// Closed-loop engine: one central error broadcast, m agents, one plant.
// ============================================================================

// Permanently zeroes the outputs of the listed agents from time t on.
struct FaultEvent {
    double t = 0.0;
    std::vector<int> agent_indices;  // 1-based
};

struct AnalysisOptions {
    bool passivity = false;
    std::string u_share = "equal";
    double tol = 1e-6;
};

struct SimConfig {
    TransferFunction plant;
    double dt = 1e-5;
    double t_end = 0.4;
    std::vector<AgentParams> agents;
    ReferenceSchedule reference;
    std::vector<FaultEvent> faults;
    Vec initial_plant_state;       // empty = zero
    bool fault_freeze_phi = false; // freeze phase dynamics of faulted agents
    AnalysisOptions analysis;

    explicit SimConfig(TransferFunction plant_) : plant(std::move(plant_)) {}

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
        if (!(t_end >= dt)) throw std::invalid_argument("config: t_end must be at least dt");
        if (agents.empty()) throw std::invalid_argument("config: needs at least one agent");
        if (plant.relative_degree() < 1)
            throw std::invalid_argument(
                "config: plant must be strictly proper (direct feedthrough closes an algebraic loop)");
        for (const auto& a : agents) a.validate();
        reference.validate();
        const int m = static_cast<int>(agents.size());
        for (const auto& f : faults) {
            if (f.t < 0.0) throw std::invalid_argument("config: fault time must be nonnegative");
            for (int idx : f.agent_indices)
                if (idx < 1 || idx > m)
                    throw std::invalid_argument("config: fault agent index out of range 1..m");
        }
        if (initial_plant_state.size() != 0 && initial_plant_state.size() != plant.order())
            throw std::invalid_argument("config: initial_plant_state length must match plant order");
        // Assumption-3 feasibility: each requested level must be reachable by
        // the agent pool, sum(u_n) <= u_r <= sum(u_p)
        double sum_up = 0.0, sum_un = 0.0;
        for (const auto& a : agents) {
            sum_up += a.u_p;
            sum_un += a.u_n;
        }
        for (size_t s = 0; s < reference.segments.size(); ++s) {
            double u_r = ur_for_yr(plant, reference.segments[s].y_r);
            std::ostringstream msg;
            if (u_r > sum_up) {
                msg << "config: reference segment " << (s + 1)
                    << " infeasible: u_r=" << u_r << " > Σu_p=" << sum_up;
                throw std::invalid_argument(msg.str());
            }
            if (u_r < sum_un) {
                msg << "config: reference segment " << (s + 1)
                    << " infeasible: u_r=" << u_r << " < Σu_n=" << sum_un;
                throw std::invalid_argument(msg.str());
            }
        }
    }
};

// Column-oriented log, one entry per tick at t = k*dt.
struct SimTrace {
    double dt = 0.0;
    int m = 0;
    std::vector<double> t, y_r, y_p, e, u_p;
    std::vector<std::vector<double>> u_pi;  // [agent][tick]
    std::vector<std::vector<double>> phi;   // [agent][tick]

    size_t rows() const { return t.size(); }
};

namespace detail {

// floor(t_end/dt) with grace for an exact multiple computed in floating point
inline long tick_count(double t_end, double dt) {
    double q = t_end / dt;
    long n = std::lround(q);
    if (std::abs(q - static_cast<double>(n)) > 1e-6) n = static_cast<long>(std::floor(q));
    return n;
}

}  // namespace detail

// Per tick: read y_r and y_p, broadcast e, read masked agent outputs, sum
// into u_p, log, then advance phases (Euler) and plant (RK4, ZOH on u_p).
inline SimTrace simulate(const SimConfig& config) {
    config.validate();
    const int m = static_cast<int>(config.agents.size());
    const StateSpace ss = tf_to_statespace(config.plant);
    const long n_ticks = detail::tick_count(config.t_end, config.dt);

    Vec x_p = config.initial_plant_state.size() != 0 ? config.initial_plant_state
                                                     : Vec::Zero(ss.order());
    std::vector<AgentState> agents(static_cast<size_t>(m));

    SimTrace tr;
    tr.dt = config.dt;
    tr.m = m;
    const size_t n_rows = static_cast<size_t>(n_ticks) + 1;
    tr.t.reserve(n_rows);
    tr.y_r.reserve(n_rows);
    tr.y_p.reserve(n_rows);
    tr.e.reserve(n_rows);
    tr.u_p.reserve(n_rows);
    tr.u_pi.assign(static_cast<size_t>(m), {});
    tr.phi.assign(static_cast<size_t>(m), {});
    for (int i = 0; i < m; ++i) {
        tr.u_pi[static_cast<size_t>(i)].reserve(n_rows);
        tr.phi[static_cast<size_t>(i)].reserve(n_rows);
    }

    for (long k = 0; k <= n_ticks; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        for (const auto& f : config.faults)
            if (t >= f.t)
                for (int idx : f.agent_indices) agents[static_cast<size_t>(idx - 1)].faulted = true;

        const double y_r = reference_at(config.reference, t);
        const double y_p = ss.order() > 0 ? (ss.c * x_p)(0) : 0.0;
        const double e = y_r - y_p;
        double u_p = 0.0;
        for (int i = 0; i < m; ++i)
            u_p += agent_output(agents[static_cast<size_t>(i)], config.agents[static_cast<size_t>(i)]);

        tr.t.push_back(t);
        tr.y_r.push_back(y_r);
        tr.y_p.push_back(y_p);
        tr.e.push_back(e);
        tr.u_p.push_back(u_p);
        for (int i = 0; i < m; ++i) {
            const auto& st = agents[static_cast<size_t>(i)];
            tr.u_pi[static_cast<size_t>(i)].push_back(agent_output(st, config.agents[static_cast<size_t>(i)]));
            tr.phi[static_cast<size_t>(i)].push_back(st.phi);
        }

        if (k == n_ticks) break;  // last row logged, nothing left to advance
        for (int i = 0; i < m; ++i) {
            auto& st = agents[static_cast<size_t>(i)];
            if (config.fault_freeze_phi && st.faulted) continue;
            st = agent_step(st, config.agents[static_cast<size_t>(i)], e, config.dt);
        }
        x_p = rk4_step(ss.A, ss.b, x_p, u_p, config.dt);
    }
    return tr;
}

// ============================================================================
// Built-in experiment presets
// ============================================================================

// Ten agents, U_p = 3, U_n = 0, descending gain ladder; condition 1 steps the
// reference 28 -> 10 at t = 0.2, condition 2 holds 10 and fails agents 1..5
// at t = 0.2.
inline SimConfig preset_config(const std::string& name) {
    ControllerKind kind;
    bool cond2;
    if (name == "asc-cond1") { kind = ControllerKind::Asc; cond2 = false; }
    else if (name == "asc-cond2") { kind = ControllerKind::Asc; cond2 = true; }
    else if (name == "assc-cond1") { kind = ControllerKind::Assc; cond2 = false; }
    else if (name == "integral-cond1") { kind = ControllerKind::Integral; cond2 = false; }
    else throw std::invalid_argument("preset: unknown name '" + name + "'");

    SimConfig cfg(TransferFunction({75.0, 4900.0}, {1.0, 98.0, 4900.0}));
    cfg.dt = 1e-5;
    cfg.t_end = 0.4;
    for (int i = 1; i <= 10; ++i) {
        AgentParams a;
        a.kind = kind;
        a.u_p = 3.0;
        a.u_n = 0.0;
        if (kind == ControllerKind::Assc) {
            a.phi_p = 0.06;
            a.phi_n = 0.0;
        }
        GainSchedule g = paper_eq16_gains(i);
        a.gains = kind == ControllerKind::Integral ? GainSchedule{g.k_lo, g.k_lo} : g;
        cfg.agents.push_back(a);
    }
    if (cond2) {
        cfg.reference.segments = {{0.0, 10.0}};
        cfg.faults = {{0.2, {1, 2, 3, 4, 5}}};
    } else {
        cfg.reference.segments = {{0.0, 28.0}, {0.2, 10.0}};
    }
    cfg.analysis.passivity = true;
    return cfg;
}

inline SimTrace run_preset(const std::string& name) { return simulate(preset_config(name)); }

}  // namespace bcast
