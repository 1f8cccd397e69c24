#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcast/agents.hpp"
#include "bcast/reference.hpp"
#include "bcast/simulator.hpp"

namespace bcast {

// ============================================================================
// Storage functions and dissipation checks mirroring the tracking proofs.
// ============================================================================

// Per-agent split of the constant reference input, sum-preserving.
struct ShareVector {
    std::vector<double> u_ri;
};

// Equal split, clamped per agent with the clipped residue spread over the
// agents that still have slack. Terminates in at most m rounds.
inline ShareVector u_share(double u_r, const std::vector<AgentParams>& params) {
    const size_t m = params.size();
    double sum_up = 0.0, sum_un = 0.0;
    for (const auto& p : params) {
        sum_up += p.u_p;
        sum_un += p.u_n;
    }
    const double scale = std::max({1.0, std::abs(u_r), std::abs(sum_up), std::abs(sum_un)});
    if (m == 0 || u_r > sum_up || u_r < sum_un) {
        std::ostringstream msg;
        msg << "u_share: u_r=" << u_r << " infeasible for the agent pool ("
            << "Σu_n=" << sum_un << ", Σu_p=" << sum_up << ")";
        throw std::invalid_argument(msg.str());
    }
    ShareVector s;
    s.u_ri.resize(m);
    for (size_t i = 0; i < m; ++i)
        s.u_ri[i] = std::clamp(u_r / static_cast<double>(m), params[i].u_n, params[i].u_p);
    for (size_t round = 0; round < m; ++round) {
        double residual = u_r;
        for (double v : s.u_ri) residual -= v;
        if (std::abs(residual) <= 1e-12 * scale) break;
        size_t slack_count = 0;
        for (size_t i = 0; i < m; ++i)
            if ((residual > 0.0 && s.u_ri[i] < params[i].u_p) ||
                (residual < 0.0 && s.u_ri[i] > params[i].u_n))
                ++slack_count;
        for (size_t i = 0; i < m; ++i)
            if ((residual > 0.0 && s.u_ri[i] < params[i].u_p) ||
                (residual < 0.0 && s.u_ri[i] > params[i].u_n))
                s.u_ri[i] = std::clamp(s.u_ri[i] + residual / static_cast<double>(slack_count),
                                       params[i].u_n, params[i].u_p);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Relay-agent storage: integral of (relay level - u_ri)/L from 0 to phi.
// Nonnegative because the relay sits above u_ri exactly where phi > 0.
inline double asc_storage(double phi, const AgentParams& params, double u_ri, double L_i) {
    if (params.kind != ControllerKind::Asc)
        throw std::invalid_argument("asc_storage: agent is not a relay controller");
    if (!(u_ri >= params.u_n) || !(u_ri <= params.u_p))
        throw std::invalid_argument("asc_storage: u_ri outside [u_n, u_p]");
    if (!(L_i >= params.gains.k_lo) || !(L_i <= params.gains.k_hi))
        throw std::invalid_argument("asc_storage: L outside [k_lo, k_hi]");
    if (phi >= 0.0) return (params.u_p - u_ri) * phi / L_i;
    return (params.u_n - u_ri) * phi / L_i;
}

namespace detail {

inline double ramp_slope(const AgentParams& p) { return (p.u_p - p.u_n) / (p.phi_p - p.phi_n); }

// Phase at which the ramp crosses u_ri.
inline double ramp_preimage(const AgentParams& p, double u_ri) {
    return p.phi_n + (u_ri - p.u_n) / ramp_slope(p);
}

// G(y) = integral from 0 to y of (u_ri - sigma_c(x)) dx for the saturated
// ramp through the origin; antiderivative taken piecewise.
inline double ramp_gap_integral(const AgentParams& p, double u_ri, double y) {
    const double slope = ramp_slope(p);
    auto band = [&](double x) { return u_ri * x - 0.5 * slope * x * x; };
    if (y > p.phi_p) return band(p.phi_p) + (u_ri - p.u_p) * (y - p.phi_p);
    if (y < p.phi_n) return band(p.phi_n) + (u_ri - p.u_n) * (y - p.phi_n);
    return band(y);
}

inline void require_assc_share(const AgentParams& p, double u_ri, const char* who) {
    if (p.kind != ControllerKind::Assc)
        throw std::invalid_argument(std::string(who) + ": agent is not a smooth-switching controller");
    if (!(u_ri >= p.u_n) || !(u_ri <= p.u_p))
        throw std::invalid_argument(std::string(who) + ": u_ri outside [u_n, u_p]");
}

}  // namespace detail

// Reference share clipped onto the reachable side of the ramp: equals u_ri
// once phi has crossed the preimage of u_ri, the ramp value before that.
inline double clipped_reference(double phi, const AgentParams& params, double u_ri) {
    detail::require_assc_share(params, u_ri, "clipped_reference");
    const double s_star = detail::ramp_preimage(params, u_ri);
    if (u_ri > 0.0) return phi >= s_star ? u_ri : assc_output(phi, params);
    return phi <= s_star ? u_ri : assc_output(phi, params);
}

// Integral of (u_ri - clipped reference) from 0 to phi; saturates once phi
// passes the preimage, may go negative on the far side (tracked separately
// from the storage below, which subtracts it out).
inline double vui(double phi, const AgentParams& params, double u_ri) {
    detail::require_assc_share(params, u_ri, "vui");
    const double s_star = detail::ramp_preimage(params, u_ri);
    const double y = u_ri > 0.0 ? std::min(phi, s_star) : std::max(phi, s_star);
    return detail::ramp_gap_integral(params, u_ri, y);
}

// Smooth-switching storage: integral of (sigma_c - clipped reference)/L from
// 0 to phi. Zero until the preimage is crossed, quadratic inside the band,
// linear beyond it; the max() absorbs rounding at the branch point.
inline double assc_storage(double phi, const AgentParams& params, double u_ri, double L_i) {
    detail::require_assc_share(params, u_ri, "assc_storage");
    if (!(L_i >= params.gains.k_lo) || !(L_i <= params.gains.k_hi))
        throw std::invalid_argument("assc_storage: L outside [k_lo, k_hi]");
    return std::max(0.0, (vui(phi, params, u_ri) -
                          detail::ramp_gap_integral(params, u_ri, phi)) / L_i);
}

// Worst-case storage defect accumulated while phases traverse their bands:
// m * kh * max band height * max band half-width.
inline double cu_bound(const std::vector<AgentParams>& params, double kh) {
    if (params.empty()) throw std::invalid_argument("cu_bound: empty agent list");
    double min_k_lo = std::numeric_limits<double>::infinity();
    double du_rm = 0.0, phi_m = 0.0;
    for (const auto& p : params) {
        min_k_lo = std::min(min_k_lo, p.gains.k_lo);
        du_rm = std::max(du_rm, p.u_p - p.u_n);
        phi_m = std::max({phi_m, std::abs(p.phi_p), std::abs(p.phi_n)});
    }
    const double required = 1.0 / min_k_lo;
    if (!(kh >= required)) {
        std::ostringstream msg;
        msg << "cu_bound: kh=" << kh << " below required " << required;
        throw std::invalid_argument(msg.str());
    }
    return static_cast<double>(params.size()) * kh * du_rm * phi_m;
}

// Aggregate quadratic storage of the integral bank, (sum u_pi - u_r)^2 / 2K_s.
inline double integral_storage(const std::vector<double>& u_pi, double u_r,
                               const std::vector<double>& gains) {
    if (gains.empty()) throw std::invalid_argument("integral_storage: empty gain list");
    double k_s = 0.0;
    for (double k : gains) {
        if (!(k > 0.0)) throw std::invalid_argument("integral_storage: gains must be positive");
        k_s += k;
    }
    double sum = 0.0;
    for (double u : u_pi) sum += u;
    const double v = sum - u_r;
    return v * v / (2.0 * k_s);
}

// ---------------------------------------------------------------------------
// Windowed tracking statistics
// ---------------------------------------------------------------------------

struct TrackingMetrics {
    double t_a = 0.0, t_b = 0.0;
    double mean_e = 0.0;
    double rms_e = 0.0;
    double std_e = 0.0;
    double max_abs_e = 0.0;
    double mean_yp = 0.0;
};

inline TrackingMetrics tracking_metrics(const SimTrace& trace, double t_a, double t_b) {
    if (!(t_a < t_b)) throw std::invalid_argument("tracking_metrics: window must satisfy t_a < t_b");
    if (trace.rows() == 0 || t_a > trace.t.back() || t_b < trace.t.front())
        throw std::invalid_argument("tracking_metrics: window outside trace span");
    TrackingMetrics m;
    m.t_a = t_a;
    m.t_b = t_b;
    size_t n = 0;
    double sum_e = 0.0, sum_e2 = 0.0, sum_yp = 0.0;
    for (size_t k = 0; k < trace.rows(); ++k) {
        if (trace.t[k] < t_a || trace.t[k] > t_b) continue;
        ++n;
        sum_e += trace.e[k];
        sum_e2 += trace.e[k] * trace.e[k];
        sum_yp += trace.y_p[k];
        m.max_abs_e = std::max(m.max_abs_e, std::abs(trace.e[k]));
    }
    if (n == 0) throw std::invalid_argument("tracking_metrics: window contains no samples");
    m.mean_e = sum_e / static_cast<double>(n);
    m.rms_e = std::sqrt(sum_e2 / static_cast<double>(n));
    double var = sum_e2 / static_cast<double>(n) - m.mean_e * m.mean_e;
    m.std_e = std::sqrt(std::max(0.0, var));
    m.mean_yp = sum_yp / static_cast<double>(n);
    return m;
}

// ---------------------------------------------------------------------------
// Dissipation check along a trace
// ---------------------------------------------------------------------------

struct PassivityReport {
    std::vector<double> v_c;                // storage at each tick
    std::vector<double> supply;             // cumulative trapezoid of v*e
    std::vector<std::vector<double>> v_ci;  // [agent][tick]
    double c_u = 0.0;
    double max_violation = 0.0;  // max over t of V_c(t) - V_c(t0) - supply - C_u
    double max_integral_residual = 0.0;  // per-step |dV_c - trapezoid| (integral bank only)
    bool passed = false;
};

inline std::vector<double> default_storage_gains(const SimConfig& config) {
    std::vector<double> L;
    L.reserve(config.agents.size());
    for (const auto& a : config.agents) L.push_back(a.gains.k_lo);
    return L;
}

namespace detail {

// First tick whose time k*dt is at or past target, matching the simulator's
// comparison exactly. May point one past the last row for late targets.
inline size_t first_tick_at(double target, double dt) {
    if (target <= 0.0) return 0;
    long guess = static_cast<long>(std::floor(target / dt)) - 2;
    if (guess < 0) guess = 0;
    while (static_cast<double>(guess) * dt < target) ++guess;
    return static_cast<size_t>(guess);
}

}  // namespace detail

// Evaluates the dissipation inequality V_c(t) - V_c(t0) <= supply + C_u on
// every analysis interval. Intervals are cut where the constant-u_r premise
// breaks: at reference switches and at fault onsets; the baseline V_c(t0) is
// re-based there. Signals are recomputed from the phase columns so each
// interval sees a consistent mask and reference level, including at its right
// endpoint (where the logged columns already belong to the next interval).
inline PassivityReport passivity_check(const SimTrace& trace, const SimConfig& config,
                                       const std::vector<double>& L, double tol) {
    const size_t m = config.agents.size();
    if (trace.m != static_cast<int>(m) || trace.rows() == 0)
        throw std::invalid_argument("passivity_check: trace does not match config");
    if (L.size() != m) throw std::invalid_argument("passivity_check: need one L per agent");
    for (size_t i = 0; i < m; ++i)
        if (!(L[i] >= config.agents[i].gains.k_lo) || !(L[i] <= config.agents[i].gains.k_hi))
            throw std::invalid_argument("passivity_check: L outside [k_lo, k_hi]");

    const size_t n = trace.rows();
    bool all_integral = true;
    for (const auto& a : config.agents)
        if (a.kind != ControllerKind::Integral) all_integral = false;

    PassivityReport rep;
    double min_k_lo = std::numeric_limits<double>::infinity();
    for (const auto& a : config.agents) min_k_lo = std::min(min_k_lo, a.gains.k_lo);
    rep.c_u = all_integral ? 0.0 : cu_bound(config.agents, 1.0 / min_k_lo);
    rep.v_c.assign(n, 0.0);
    rep.supply.assign(n, 0.0);
    rep.v_ci.assign(m, std::vector<double>(n, 0.0));
    rep.max_violation = -std::numeric_limits<double>::infinity();

    // interval boundaries: t = 0, reference switches, fault onsets
    std::set<size_t> cuts{0};
    for (size_t s = 1; s < config.reference.segments.size(); ++s) {
        size_t k = detail::first_tick_at(config.reference.segments[s].t_start, trace.dt);
        if (k < n) cuts.insert(k);
    }
    for (const auto& f : config.faults) {
        size_t k = detail::first_tick_at(f.t, trace.dt);
        if (k < n) cuts.insert(k);
    }
    std::vector<size_t> begins(cuts.begin(), cuts.end());

    for (size_t j = 0; j < begins.size(); ++j) {
        const size_t kb = begins[j];
        const size_t ke = j + 1 < begins.size() ? begins[j + 1] : n - 1;
        const bool owns_end = j + 1 == begins.size();

        const double y_r_j = reference_at(config.reference, static_cast<double>(kb) * trace.dt);
        const double u_r_j = ur_for_yr(config.plant, y_r_j);
        std::vector<char> faulted(m, 0);
        for (const auto& f : config.faults)
            if (detail::first_tick_at(f.t, trace.dt) <= kb)
                for (int idx : f.agent_indices) faulted[static_cast<size_t>(idx - 1)] = 1;

        std::vector<AgentParams> healthy;
        std::vector<size_t> healthy_idx;
        for (size_t i = 0; i < m; ++i)
            if (!faulted[i]) {
                healthy.push_back(config.agents[i]);
                healthy_idx.push_back(i);
            }
        std::vector<double> share(m, 0.0);
        if (healthy.empty()) {
            if (u_r_j != 0.0)
                throw std::invalid_argument("passivity_check: all agents faulted with nonzero u_r");
        } else {
            ShareVector sv = u_share(u_r_j, healthy);
            for (size_t h = 0; h < healthy_idx.size(); ++h) share[healthy_idx[h]] = sv.u_ri[h];
        }

        auto storage_i = [&](size_t i, size_t k) -> double {
            if (faulted[i]) return 0.0;
            const AgentParams& p = config.agents[i];
            const double phi = trace.phi[i][k];
            switch (p.kind) {
                case ControllerKind::Asc: return asc_storage(phi, p, share[i], L[i]);
                case ControllerKind::Assc: return assc_storage(phi, p, share[i], L[i]);
                case ControllerKind::Integral: {
                    const double d = integral_output(phi, p) - share[i];
                    return d * d / (2.0 * p.gains.k_lo);
                }
            }
            return 0.0;
        };
        auto u_p_masked = [&](size_t k) {
            double sum = 0.0;
            for (size_t i = 0; i < m; ++i)
                if (!faulted[i]) sum += agent_output({trace.phi[i][k], false}, config.agents[i]);
            return sum;
        };

        double v_prev = 0.0, e_prev = 0.0, vc_base = 0.0, supply_base = rep.supply[kb];
        for (size_t k = kb; k <= ke; ++k) {
            const double e_k = y_r_j - trace.y_p[k];
            const double v_k = u_p_masked(k) - u_r_j;
            double vc_k = 0.0;
            for (size_t i = 0; i < m; ++i) {
                const double s = storage_i(i, k);
                vc_k += s;
                if (k < ke || owns_end) rep.v_ci[i][k] = s;
            }
            if (k == kb) {
                vc_base = vc_k;
            } else {
                const double inc = 0.5 * (v_prev * e_prev + v_k * e_k) * trace.dt;
                rep.supply[k] = rep.supply[k - 1] + inc;
                if (all_integral && healthy.size() == m) {
                    // step equality holds while every phase sits inside its band
                    bool unsaturated = true;
                    for (size_t i = 0; i < m; ++i) {
                        const AgentParams& p = config.agents[i];
                        for (size_t kk : {k - 1, k})
                            if (trace.phi[i][kk] < p.u_n || trace.phi[i][kk] > p.u_p)
                                unsaturated = false;
                    }
                    if (unsaturated) {
                        double prev_vc = 0.0;
                        for (size_t i = 0; i < m; ++i) prev_vc += storage_i(i, k - 1);
                        rep.max_integral_residual =
                            std::max(rep.max_integral_residual, std::abs(vc_k - prev_vc - inc));
                    }
                }
            }
            if (k < ke || owns_end) rep.v_c[k] = vc_k;
            rep.max_violation = std::max(
                rep.max_violation, vc_k - vc_base - (rep.supply[k] - supply_base) - rep.c_u);
            v_prev = v_k;
            e_prev = e_k;
        }
    }
    rep.passed = rep.max_violation <= tol;
    return rep;
}

}  // namespace bcast
