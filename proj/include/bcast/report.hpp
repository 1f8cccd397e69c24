#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bcast/analysis.hpp"
#include "bcast/config.hpp"
#include "bcast/lti.hpp"
#include "bcast/simulator.hpp"

namespace bcast {

struct WindowMetrics {
    double t_a = 0.0;
    double t_b = 0.0;
    TrackingMetrics metrics;
};

inline json spr_to_json(const SprCertificate& cert) {
    json j;
    j["verdict"] = to_string(cert.verdict);
    j["hurwitz"] = cert.hurwitz;
    j["relative_degree"] = cert.relative_degree;
    j["realpart_poly"] = cert.realpart_poly;
    j["min_nonneg_value"] = cert.min_nonneg_value;
    j["reason"] = cert.reason;
    return j;
}

// A segment counts as reached when the output comes within 2% of the level
// (absolute floor of 0.02) at least once before the segment ends.
inline std::vector<std::string> tracking_flags(const SimTrace& trace,
                                               const SimConfig& config) {
    std::vector<std::string> flags;
    const size_t n = trace.rows();
    const auto& segs = config.reference.segments;
    for (size_t s = 0; s < segs.size(); ++s) {
        size_t kb = detail::first_tick_at(segs[s].t_start, trace.dt);
        size_t ke = s + 1 < segs.size() ? detail::first_tick_at(segs[s + 1].t_start, trace.dt) : n;
        if (kb >= n) break;
        ke = std::min(ke, n);
        double best = std::numeric_limits<double>::infinity();
        for (size_t k = kb; k < ke; ++k)
            best = std::min(best, std::abs(segs[s].y_r - trace.y_p[k]));
        if (best > 0.02 * std::max(1.0, std::abs(segs[s].y_r)))
            flags.push_back("reference not reached in segment " + std::to_string(s + 1));
    }
    return flags;
}

inline json make_report(const std::string& identity, const SimConfig& config,
                        const SimTrace& trace, const SprCertificate& cert,
                        const std::vector<WindowMetrics>& windows,
                        const std::optional<PassivityReport>& passivity,
                        const std::vector<std::string>& outputs) {
    json j;
    j["run"] = {{"identity", identity},
                {"dt", config.dt},
                {"t_end", config.t_end},
                {"agents", config.agents.size()},
                {"controller", to_string(config.agents.front().kind)},
                {"rows", trace.rows()}};
    j["windows"] = json::array();
    for (const auto& w : windows)
        j["windows"].push_back({{"t_a", w.t_a},
                                {"t_b", w.t_b},
                                {"mean_e", w.metrics.mean_e},
                                {"rms_e", w.metrics.rms_e},
                                {"std_e", w.metrics.std_e},
                                {"max_abs_e", w.metrics.max_abs_e},
                                {"mean_yp", w.metrics.mean_yp}});
    if (passivity) {
        j["passivity"] = {{"max_violation", passivity->max_violation},
                          {"c_u", passivity->c_u},
                          {"max_integral_residual", passivity->max_integral_residual},
                          {"tol", config.analysis.tol},
                          {"passed", passivity->passed}};
    } else {
        j["passivity"] = nullptr;
    }
    j["spr"] = spr_to_json(cert);
    j["flags"] = tracking_flags(trace, config);
    j["config"] = save_config(config);
    j["outputs"] = outputs;
    return j;
}

}  // namespace bcast
