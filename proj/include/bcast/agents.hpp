#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcast {

// ============================================================================
// Decentralized agent controllers driven by the shared broadcast error e.
// Each agent owns one scalar phase phi and emits one bounded output.
// ============================================================================

enum class ControllerKind { Asc, Assc, Integral };

inline const char* to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::Asc: return "asc";
        case ControllerKind::Assc: return "assc";
        case ControllerKind::Integral: return "integral";
    }
    return "?";
}

// Two-level phase gain. Integral agents carry a single fixed gain, stored
// with k_lo == k_hi.
struct GainSchedule {
    double k_lo = 1.0;
    double k_hi = 1.0;
};

struct AgentParams {
    ControllerKind kind = ControllerKind::Asc;
    double u_p = 1.0;   // saturated high level
    double u_n = 0.0;   // low / inactive level
    double phi_p = 0.0; // smooth-switching upper threshold (Assc only)
    double phi_n = 0.0; // smooth-switching lower threshold (Assc only)
    GainSchedule gains;

    void validate() const {
        if (!(u_n < u_p)) throw std::invalid_argument("agent: requires u_n < u_p");
        if (!(gains.k_lo > 0.0) || !(gains.k_lo <= gains.k_hi))
            throw std::invalid_argument("agent: requires 0 < k_lo <= k_hi");
        if (kind == ControllerKind::Integral && gains.k_lo != gains.k_hi)
            throw std::invalid_argument("agent: integral kind takes a single gain");
        if (kind == ControllerKind::Assc) {
            if (!(phi_n < phi_p))
                throw std::invalid_argument("agent: requires phi_n < phi_p");
            if (!(phi_n <= 0.0) || !(0.0 <= phi_p))
                throw std::invalid_argument("agent: requires phi_n <= 0 <= phi_p");
            if (!(u_n <= 0.0) || !(0.0 <= u_p))
                throw std::invalid_argument("agent: requires u_n <= 0 <= u_p");
            // the ramp must pass through the origin: u_n + (u_p-u_n)(0-phi_n)/(phi_p-phi_n) = 0
            double origin_defect = u_n * (phi_p - phi_n) - phi_n * (u_p - u_n);
            double scale = (u_p - u_n) * std::max(std::abs(phi_p), std::abs(phi_n));
            if (std::abs(origin_defect) > 1e-12 * scale)
                throw std::invalid_argument("agent: switching ramp does not pass through zero");
        }
    }
};

struct AgentState {
    double phi = 0.0;
    bool faulted = false;
};

// Variable phase gain: the high gain applies only while the phase is being
// driven back down from above (phi > 0 with e < 0); every other quadrant,
// including the phi*e = 0 boundaries, takes the low gain.
inline double gain(const AgentParams& params, double phi, double e) {
    if (params.kind == ControllerKind::Integral)
        throw std::logic_error("gain: integral agents use a fixed gain");
    if (phi * e < 0.0 && phi > 0.0) return params.gains.k_hi;
    return params.gains.k_lo;
}

// Relay: high level strictly above the switching surface.
inline double asc_output(double phi, const AgentParams& params) {
    return phi > 0.0 ? params.u_p : params.u_n;
}

// Saturated ramp between (phi_n, u_n) and (phi_p, u_p).
inline double assc_output(double phi, const AgentParams& params) {
    if (phi >= params.phi_p) return params.u_p;
    if (phi <= params.phi_n) return params.u_n;
    return params.u_n + (params.u_p - params.u_n) * (phi - params.phi_n) /
                            (params.phi_p - params.phi_n);
}

inline double integral_output(double phi, const AgentParams& params) {
    return std::clamp(phi, params.u_n, params.u_p);
}

inline double agent_output(const AgentState& state, const AgentParams& params) {
    if (state.faulted) return 0.0;
    switch (params.kind) {
        case ControllerKind::Asc: return asc_output(state.phi, params);
        case ControllerKind::Assc: return assc_output(state.phi, params);
        case ControllerKind::Integral: return integral_output(state.phi, params);
    }
    return 0.0;
}

// Explicit Euler on phi' = K(phi, e) e, gain frozen at the pre-step values.
// A fault leaves the phase dynamics running; only the output is cut.
inline AgentState agent_step(const AgentState& state, const AgentParams& params, double e,
                             double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("agent_step: dt must be positive");
    double k = params.kind == ControllerKind::Integral ? params.gains.k_lo
                                                       : gain(params, state.phi, e);
    return {state.phi + k * e * dt, state.faulted};
}

// Descending low gains 10, 9, ..., 1 with the high gain scaled up per agent.
// Exact in double arithmetic: k_lo is a small integer and (i+4)/5 hits the
// representable grid for every i in 1..10.
inline GainSchedule paper_eq16_gains(int i) {
    if (i < 1 || i > 10)
        throw std::invalid_argument("paper_eq16_gains: agent index out of range 1..10");
    double k_lo = static_cast<double>(11 - i);
    double k_hi = k_lo * (static_cast<double>(i + 4) / 5.0);
    return {k_lo, k_hi};
}

}  // namespace bcast
