#pragma once

#include <stdexcept>
#include <vector>

#include "bcast/lti.hpp"

namespace bcast {

// ============================================================================
// Piecewise-constant reference schedules and the reference model they feed.
// ============================================================================

struct ReferenceSegment {
    double t_start = 0.0;
    double y_r = 0.0;
};

struct ReferenceSchedule {
    std::vector<ReferenceSegment> segments;

    void validate() const {
        if (segments.empty())
            throw std::invalid_argument("reference: schedule needs at least one segment");
        if (segments.front().t_start != 0.0)
            throw std::invalid_argument("reference: first segment must start at t = 0");
        for (size_t k = 1; k < segments.size(); ++k)
            if (!(segments[k - 1].t_start < segments[k].t_start))
                throw std::invalid_argument("reference: segment starts must strictly increase");
    }
};

// Value of the last segment with t_start <= t; segments are left-closed, so
// the new level applies exactly at the switch instant.
inline double reference_at(const ReferenceSchedule& schedule, double t) {
    if (schedule.segments.empty() || t < schedule.segments.front().t_start)
        throw std::invalid_argument("reference: t precedes the schedule");
    double y = schedule.segments.front().y_r;
    for (const auto& seg : schedule.segments) {
        if (seg.t_start > t) break;
        y = seg.y_r;
    }
    return y;
}

// Equilibrium state for constant input: solves A x = -b u_r so the model
// holds its output from t = 0.
inline Vec steady_state_init(const StateSpace& ss, double u_r) {
    ss.check_dims();
    Eigen::FullPivLU<Mat> lu(ss.A);
    if (!lu.isInvertible())
        throw std::invalid_argument("steady_state_init: A is singular, constant reference not realizable");
    return lu.solve(-ss.b * u_r);
}

inline double dc_gain(const TransferFunction& tf) {
    double den0 = tf.den.back();
    if (den0 == 0.0)
        throw std::invalid_argument("dc_gain: denominator vanishes at s = 0 (integrating plant)");
    return tf.num.back() / den0;
}

inline double ur_for_yr(const TransferFunction& tf, double y_r) {
    double g = dc_gain(tf);
    if (g == 0.0) throw std::invalid_argument("ur_for_yr: zero DC gain");
    return y_r / g;
}

// Reference model sharing the plant realization, re-seated at its equilibrium
// whenever the schedule switches level.
struct ReferenceModel {
    StateSpace ss;
    Vec x_r;
    double u_r = 0.0;

    static ReferenceModel at_level(const StateSpace& ss, const TransferFunction& tf, double y_r) {
        ReferenceModel m;
        m.ss = ss;
        m.u_r = ur_for_yr(tf, y_r);
        m.x_r = steady_state_init(ss, m.u_r);
        return m;
    }

    double output() const { return (ss.c * x_r)(0) + ss.d * u_r; }
};

}  // namespace bcast
