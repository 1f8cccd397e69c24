#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcast/lti.hpp"
#include "bcast/simulator.hpp"
#include "json.hpp"

namespace bcast {

using json = nlohmann::json;

namespace detail {

inline const json& need(const json& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end()) {
        std::ostringstream msg;
        msg << "config: missing field \"" << (*where ? where : "") << (*where ? "." : "") << key
            << "\"";
        throw std::invalid_argument(msg.str());
    }
    return *it;
}

inline double num_field(const json& j, const char* key, const char* where) {
    const json& v = need(j, key, where);
    if (!v.is_number()) {
        std::ostringstream msg;
        msg << "config: field \"" << (*where ? where : "") << (*where ? "." : "") << key
            << "\" must be a number";
        throw std::invalid_argument(msg.str());
    }
    return v.get<double>();
}

inline std::vector<double> num_list(const json& v, const char* name) {
    if (!v.is_array() || v.empty())
        throw std::invalid_argument(std::string("config: field \"") + name +
                                    "\" must be a nonempty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number())
            throw std::invalid_argument(std::string("config: field \"") + name +
                                        "\" must contain only numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known,
                           const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok)
            throw std::invalid_argument(std::string("config: unrecognized field \"") +
                                        (*where ? where + std::string(".") : std::string()) +
                                        it.key() + "\"");
    }
}

}  // namespace detail

// Parses and fully validates a configuration document. The plant must pass
// the SPR test unless allow_non_spr is set; every module-level invariant is
// enforced before the config is returned.
inline SimConfig load_config(const json& j, bool allow_non_spr = false) {
    if (!j.is_object()) throw std::invalid_argument("config: document root must be an object");
    detail::reject_unknown(j,
                           {"plant", "dt", "t_end", "initial_plant_state", "reference", "agents",
                            "faults", "analysis", "fault_freeze_phi"},
                           "");

    const json& plant = detail::need(j, "plant", "");
    detail::reject_unknown(plant, {"num", "den"}, "plant");
    TransferFunction tf(detail::num_list(detail::need(plant, "num", "plant"), "plant.num"),
                        detail::num_list(detail::need(plant, "den", "plant"), "plant.den"));

    SimConfig cfg(tf);
    cfg.dt = detail::num_field(j, "dt", "");
    cfg.t_end = detail::num_field(j, "t_end", "");

    if (j.contains("initial_plant_state")) {
        std::vector<double> x0 = detail::num_list(j["initial_plant_state"], "initial_plant_state");
        cfg.initial_plant_state = Eigen::Map<const Vec>(x0.data(), static_cast<long>(x0.size()));
    }

    const json& ref = detail::need(j, "reference", "");
    detail::reject_unknown(ref, {"segments"}, "reference");
    const json& segs = detail::need(ref, "segments", "reference");
    if (!segs.is_array() || segs.empty())
        throw std::invalid_argument("config: field \"reference.segments\" must be a nonempty array");
    for (const auto& s : segs) {
        detail::reject_unknown(s, {"t_start", "y_r"}, "reference.segments[]");
        cfg.reference.segments.push_back({detail::num_field(s, "t_start", "reference.segments[]"),
                                          detail::num_field(s, "y_r", "reference.segments[]")});
    }

    const json& ag = detail::need(j, "agents", "");
    detail::reject_unknown(ag, {"kind", "m", "u_p", "u_n", "phi_p", "phi_n", "gains"}, "agents");
    const json& kind_j = detail::need(ag, "kind", "agents");
    if (!kind_j.is_string())
        throw std::invalid_argument("config: field \"agents.kind\" must be a string");
    std::string kind_s = kind_j.get<std::string>();
    ControllerKind kind;
    if (kind_s == "asc")
        kind = ControllerKind::Asc;
    else if (kind_s == "assc")
        kind = ControllerKind::Assc;
    else if (kind_s == "integral")
        kind = ControllerKind::Integral;
    else
        throw std::invalid_argument("config: field \"agents.kind\" must be one of "
                                    "\"asc\", \"assc\", \"integral\"");
    const json& m_j = detail::need(ag, "m", "agents");
    if (!m_j.is_number_integer() || m_j.get<long>() < 1)
        throw std::invalid_argument("config: field \"agents.m\" must be a positive integer");
    const size_t m = m_j.get<size_t>();

    AgentParams base;
    base.kind = kind;
    base.u_p = detail::num_field(ag, "u_p", "agents");
    base.u_n = detail::num_field(ag, "u_n", "agents");
    if (ag.contains("phi_p")) base.phi_p = detail::num_field(ag, "phi_p", "agents");
    if (ag.contains("phi_n")) base.phi_n = detail::num_field(ag, "phi_n", "agents");

    const json& gains = detail::need(ag, "gains", "agents");
    std::vector<GainSchedule> schedule(m);
    if (gains.contains("preset")) {
        detail::reject_unknown(gains, {"preset"}, "agents.gains");
        if (!gains["preset"].is_string() || gains["preset"].get<std::string>() != "paper-eq16")
            throw std::invalid_argument("config: unknown gain preset, expected \"paper-eq16\"");
        for (size_t i = 0; i < m; ++i) schedule[i] = paper_eq16_gains(static_cast<int>(i) + 1);
    } else if (gains.contains("k")) {
        detail::reject_unknown(gains, {"k"}, "agents.gains");
        std::vector<double> k = detail::num_list(gains["k"], "agents.gains.k");
        if (k.size() != m)
            throw std::invalid_argument("config: field \"agents.gains.k\" must list one gain per agent");
        for (size_t i = 0; i < m; ++i) schedule[i] = {k[i], k[i]};
    } else if (gains.contains("k_lo")) {
        detail::reject_unknown(gains, {"k_lo", "k_hi_factor"}, "agents.gains");
        std::vector<double> k_lo = detail::num_list(gains["k_lo"], "agents.gains.k_lo");
        std::vector<double> fac = detail::num_list(
            detail::need(gains, "k_hi_factor", "agents.gains"), "agents.gains.k_hi_factor");
        if (k_lo.size() != m || fac.size() != m)
            throw std::invalid_argument(
                "config: fields \"agents.gains.k_lo\" and \"agents.gains.k_hi_factor\" must list "
                "one value per agent");
        for (size_t i = 0; i < m; ++i) schedule[i] = {k_lo[i], k_lo[i] * fac[i]};
    } else {
        throw std::invalid_argument(
            "config: field \"agents.gains\" must provide \"preset\", \"k\", or "
            "\"k_lo\"/\"k_hi_factor\"");
    }
    for (size_t i = 0; i < m; ++i) {
        AgentParams p = base;
        p.gains = schedule[i];
        cfg.agents.push_back(p);
    }

    if (j.contains("faults")) {
        const json& faults = j["faults"];
        if (!faults.is_array())
            throw std::invalid_argument("config: field \"faults\" must be an array");
        for (const auto& f : faults) {
            detail::reject_unknown(f, {"t", "agents"}, "faults[]");
            FaultEvent ev;
            ev.t = detail::num_field(f, "t", "faults[]");
            const json& idx = detail::need(f, "agents", "faults[]");
            if (!idx.is_array() || idx.empty())
                throw std::invalid_argument(
                    "config: field \"faults[].agents\" must be a nonempty array of agent indices");
            for (const auto& x : idx) {
                if (!x.is_number_integer())
                    throw std::invalid_argument(
                        "config: field \"faults[].agents\" must contain integer indices");
                ev.agent_indices.push_back(x.get<int>());
            }
            cfg.faults.push_back(ev);
        }
    }

    if (j.contains("analysis")) {
        const json& an = j["analysis"];
        detail::reject_unknown(an, {"passivity", "u_share", "tol"}, "analysis");
        if (an.contains("passivity")) {
            if (!an["passivity"].is_boolean())
                throw std::invalid_argument("config: field \"analysis.passivity\" must be a boolean");
            cfg.analysis.passivity = an["passivity"].get<bool>();
        }
        if (an.contains("u_share")) {
            if (!an["u_share"].is_string() || an["u_share"].get<std::string>() != "equal")
                throw std::invalid_argument("config: field \"analysis.u_share\" must be \"equal\"");
        }
        if (an.contains("tol")) cfg.analysis.tol = detail::num_field(an, "tol", "analysis");
    }

    if (j.contains("fault_freeze_phi")) {
        if (!j["fault_freeze_phi"].is_boolean())
            throw std::invalid_argument("config: field \"fault_freeze_phi\" must be a boolean");
        cfg.fault_freeze_phi = j["fault_freeze_phi"].get<bool>();
    }

    cfg.validate();

    if (!allow_non_spr) {
        SprCertificate cert = spr_test(cfg.plant);
        if (cert.verdict != SprVerdict::StrictlyPositiveReal) {
            std::ostringstream msg;
            msg << "config: plant is not strictly positive real: verdict "
                << to_string(cert.verdict);
            if (!cert.reason.empty()) msg << " (" << cert.reason << ")";
            msg << "; hurwitz=" << (cert.hurwitz ? "true" : "false")
                << ", relative degree " << cert.relative_degree;
            throw std::invalid_argument(msg.str());
        }
    }
    return cfg;
}

inline SimConfig load_config_text(const std::string& text, bool allow_non_spr = false) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw std::invalid_argument(std::string("config: parse error: ") + ex.what());
    }
    return load_config(j, allow_non_spr);
}

inline SimConfig load_config_file(const std::string& path, bool allow_non_spr = false) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config_text(buf.str(), allow_non_spr);
}

// Serializes a config back to the document schema. The pool must be
// homogeneous in everything but gains (that is all the schema can express).
inline json save_config(const SimConfig& cfg) {
    if (cfg.agents.empty()) throw std::invalid_argument("config: empty agent pool");
    const AgentParams& a0 = cfg.agents.front();
    for (const auto& a : cfg.agents)
        if (a.kind != a0.kind || a.u_p != a0.u_p || a.u_n != a0.u_n || a.phi_p != a0.phi_p ||
            a.phi_n != a0.phi_n)
            throw std::invalid_argument("config: heterogeneous agent pool is not serializable");

    json j;
    j["plant"]["num"] = cfg.plant.num;
    j["plant"]["den"] = cfg.plant.den;
    j["dt"] = cfg.dt;
    j["t_end"] = cfg.t_end;
    if (cfg.initial_plant_state.size() > 0)
        j["initial_plant_state"] =
            std::vector<double>(cfg.initial_plant_state.data(),
                                cfg.initial_plant_state.data() + cfg.initial_plant_state.size());
    j["reference"]["segments"] = json::array();
    for (const auto& s : cfg.reference.segments)
        j["reference"]["segments"].push_back({{"t_start", s.t_start}, {"y_r", s.y_r}});

    json ag;
    ag["kind"] = to_string(a0.kind);
    ag["m"] = cfg.agents.size();
    ag["u_p"] = a0.u_p;
    ag["u_n"] = a0.u_n;
    if (a0.kind == ControllerKind::Assc) {
        ag["phi_p"] = a0.phi_p;
        ag["phi_n"] = a0.phi_n;
    }
    bool is_eq16 = cfg.agents.size() <= 10;
    for (size_t i = 0; is_eq16 && i < cfg.agents.size(); ++i) {
        GainSchedule ref = paper_eq16_gains(static_cast<int>(i) + 1);
        if (cfg.agents[i].gains.k_lo != ref.k_lo || cfg.agents[i].gains.k_hi != ref.k_hi)
            is_eq16 = false;
    }
    bool is_flat = true;
    for (const auto& a : cfg.agents)
        if (a.gains.k_lo != a.gains.k_hi) is_flat = false;
    if (is_eq16) {
        ag["gains"]["preset"] = "paper-eq16";
    } else if (is_flat) {
        std::vector<double> k;
        for (const auto& a : cfg.agents) k.push_back(a.gains.k_lo);
        ag["gains"]["k"] = k;
    } else {
        std::vector<double> k_lo, fac;
        for (const auto& a : cfg.agents) {
            k_lo.push_back(a.gains.k_lo);
            fac.push_back(a.gains.k_hi / a.gains.k_lo);
        }
        ag["gains"]["k_lo"] = k_lo;
        ag["gains"]["k_hi_factor"] = fac;
    }
    j["agents"] = ag;

    if (!cfg.faults.empty()) {
        j["faults"] = json::array();
        for (const auto& f : cfg.faults)
            j["faults"].push_back({{"t", f.t}, {"agents", f.agent_indices}});
    }
    j["analysis"] = {{"passivity", cfg.analysis.passivity},
                     {"u_share", cfg.analysis.u_share},
                     {"tol", cfg.analysis.tol}};
    if (cfg.fault_freeze_phi) j["fault_freeze_phi"] = true;
    return j;
}

}  // namespace bcast
