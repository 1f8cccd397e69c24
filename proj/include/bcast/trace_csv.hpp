#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcast/simulator.hpp"

namespace bcast {

namespace detail {

// 17 significant digits: enough for an exact double round trip.
inline void append_g17(std::string& out, double v) {
    char buf[32];
    int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<size_t>(n));
}

}  // namespace detail

inline void write_trace_csv(const SimTrace& trace, std::ostream& os) {
    std::string line = "t,y_r,y_p,e,u_p";
    for (int i = 1; i <= trace.m; ++i) line += ",u_p_" + std::to_string(i);
    for (int i = 1; i <= trace.m; ++i) line += ",phi_" + std::to_string(i);
    line += '\n';
    os << line;
    for (size_t k = 0; k < trace.rows(); ++k) {
        line.clear();
        detail::append_g17(line, trace.t[k]);
        for (double v : {trace.y_r[k], trace.y_p[k], trace.e[k], trace.u_p[k]}) {
            line += ',';
            detail::append_g17(line, v);
        }
        for (int i = 0; i < trace.m; ++i) {
            line += ',';
            detail::append_g17(line, trace.u_pi[static_cast<size_t>(i)][k]);
        }
        for (int i = 0; i < trace.m; ++i) {
            line += ',';
            detail::append_g17(line, trace.phi[static_cast<size_t>(i)][k]);
        }
        line += '\n';
        os << line;
    }
}

inline std::string trace_csv_string(const SimTrace& trace) {
    std::ostringstream os;
    write_trace_csv(trace, os);
    return os.str();
}

inline SimTrace read_trace_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::invalid_argument("trace csv: empty input");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    if (cols.size() < 5 || cols[0] != "t" || cols[1] != "y_r" || cols[2] != "y_p" ||
        cols[3] != "e" || cols[4] != "u_p" || (cols.size() - 5) % 2 != 0)
        throw std::invalid_argument("trace csv: unrecognized header");
    const int m = static_cast<int>((cols.size() - 5) / 2);
    for (int i = 0; i < m; ++i) {
        if (cols[static_cast<size_t>(5 + i)] != "u_p_" + std::to_string(i + 1) ||
            cols[static_cast<size_t>(5 + m + i)] != "phi_" + std::to_string(i + 1))
            throw std::invalid_argument("trace csv: unrecognized header");
    }

    SimTrace trace;
    trace.m = m;
    trace.u_pi.assign(static_cast<size_t>(m), {});
    trace.phi.assign(static_cast<size_t>(m), {});
    std::string line;
    const size_t ncols = cols.size();
    std::vector<double> row(ncols);
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* p = line.c_str();
        for (size_t c = 0; c < ncols; ++c) {
            char* end = nullptr;
            row[c] = std::strtod(p, &end);
            if (end == p)
                throw std::invalid_argument("trace csv: malformed number in row " +
                                            std::to_string(trace.rows() + 1));
            p = end;
            if (c + 1 < ncols) {
                if (*p != ',')
                    throw std::invalid_argument("trace csv: wrong column count in row " +
                                                std::to_string(trace.rows() + 1));
                ++p;
            }
        }
        if (*p != '\0')
            throw std::invalid_argument("trace csv: trailing data in row " +
                                        std::to_string(trace.rows() + 1));
        trace.t.push_back(row[0]);
        trace.y_r.push_back(row[1]);
        trace.y_p.push_back(row[2]);
        trace.e.push_back(row[3]);
        trace.u_p.push_back(row[4]);
        for (int i = 0; i < m; ++i) {
            trace.u_pi[static_cast<size_t>(i)].push_back(row[static_cast<size_t>(5 + i)]);
            trace.phi[static_cast<size_t>(i)].push_back(row[static_cast<size_t>(5 + m + i)]);
        }
    }
    trace.dt = trace.rows() >= 2 ? trace.t[1] - trace.t[0] : 0.0;
    return trace;
}

inline SimTrace read_trace_csv_text(const std::string& text) {
    std::istringstream is(text);
    return read_trace_csv(is);
}

}  // namespace bcast
