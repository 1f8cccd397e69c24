#include "bcast/reference.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bcast;

namespace {

const TransferFunction kPlant({75.0, 4900.0}, {1.0, 98.0, 4900.0});

ReferenceSchedule two_stage() {
    ReferenceSchedule s;
    s.segments = {{0.0, 28.0}, {0.2, 10.0}};
    s.validate();
    return s;
}

}  // namespace

// ------------------------------------------------------------ steady state

TEST(SteadyStateInit, ZeroInputGivesZeroState) {
    Vec x = steady_state_init(tf_to_statespace(kPlant), 0.0);
    EXPECT_EQ(x(0), 0.0);
    EXPECT_EQ(x(1), 0.0);
}

TEST(SteadyStateInit, TrackedPlantEquilibrium) {
    StateSpace ss = tf_to_statespace(kPlant);
    Vec x = steady_state_init(ss, 28.0);
    EXPECT_NEAR(x(0), 0.0, 1e-15);
    EXPECT_NEAR(x(1), 28.0 / 4900.0, 1e-15);
    EXPECT_NEAR((ss.c * x)(0), 28.0, 1e-9);
}

TEST(SteadyStateInit, OutputHoldsUnderSimulation) {
    StateSpace ss = tf_to_statespace(kPlant);
    const double u_r = 28.0;
    Vec x = steady_state_init(ss, u_r);
    double y0 = (ss.c * x)(0);
    const double dt = 1e-4;
    for (int k = 0; k < 1000; ++k) {  // 0.1 s
        x = rk4_step(ss.A, ss.b, x, u_r, dt);
        EXPECT_LT(std::abs((ss.c * x)(0) - y0), 1e-6);
    }
}

TEST(SteadyStateInit, RejectsSingularDynamics) {
    StateSpace ss = tf_to_statespace(TransferFunction({1.0}, {1.0, 1.0, 0.0}));
    EXPECT_THROW(steady_state_init(ss, 1.0), std::invalid_argument);
}

// ----------------------------------------------------------------- DC gain

TEST(DcGain, KnownValues) {
    EXPECT_EQ(dc_gain(kPlant), 1.0);
    EXPECT_EQ(dc_gain(TransferFunction({1.0}, {1.0, 1.0})), 1.0);
    EXPECT_EQ(dc_gain(TransferFunction({2.0, 6.0}, {1.0, 3.0})), 2.0);
}

TEST(DcGain, RejectsIntegratingPlant) {
    EXPECT_THROW(dc_gain(TransferFunction({1.0}, {1.0, 0.0})), std::invalid_argument);
}

TEST(UrForYr, InvertsDcGain) {
    EXPECT_EQ(ur_for_yr(kPlant, 28.0), 28.0);
    EXPECT_EQ(ur_for_yr(kPlant, 0.0), 0.0);
    EXPECT_EQ(ur_for_yr(TransferFunction({2.0, 6.0}, {1.0, 3.0}), 4.0), 2.0);
}

TEST(UrForYr, RejectsZeroDcGain) {
    EXPECT_THROW(ur_for_yr(TransferFunction({1.0, 0.0}, {1.0, 1.0}), 1.0),
                 std::invalid_argument);
}

// ---------------------------------------------------------------- schedule

TEST(ReferenceAt, TwoStageSchedule) {
    ReferenceSchedule s = two_stage();
    EXPECT_EQ(reference_at(s, 0.0), 28.0);
    EXPECT_EQ(reference_at(s, 0.1), 28.0);
    EXPECT_EQ(reference_at(s, 0.2), 10.0);  // switch instant takes the new level
    EXPECT_EQ(reference_at(s, 0.3), 10.0);
    EXPECT_EQ(reference_at(s, 1e9), 10.0);
}

TEST(ReferenceAt, RejectsTimeBeforeSchedule) {
    EXPECT_THROW(reference_at(two_stage(), -0.01), std::invalid_argument);
}

TEST(ReferenceAt, RightContinuousPiecewiseConstant) {
    ReferenceSchedule s;
    s.segments = {{0.0, 1.0}, {0.5, -2.0}, {1.25, 7.0}};
    s.validate();
    for (const auto& seg : s.segments) {
        double at = reference_at(s, seg.t_start);
        EXPECT_EQ(at, seg.y_r);
        EXPECT_EQ(reference_at(s, seg.t_start + 1e-12), at);
        EXPECT_EQ(reference_at(s, std::nextafter(seg.t_start, 2.0)), at);
    }
    // constant between switches
    EXPECT_EQ(reference_at(s, 0.6), reference_at(s, 1.2499));
}

TEST(ReferenceSchedule, ValidationRejectsMalformedSchedules) {
    ReferenceSchedule empty;
    EXPECT_THROW(empty.validate(), std::invalid_argument);
    ReferenceSchedule late;
    late.segments = {{0.1, 1.0}};
    EXPECT_THROW(late.validate(), std::invalid_argument);
    ReferenceSchedule unsorted;
    unsorted.segments = {{0.0, 1.0}, {0.2, 2.0}, {0.2, 3.0}};
    EXPECT_THROW(unsorted.validate(), std::invalid_argument);
}

// ------------------------------------------------------------------- model

TEST(ReferenceModel, HoldsRequestedLevel) {
    StateSpace ss = tf_to_statespace(kPlant);
    ReferenceModel m = ReferenceModel::at_level(ss, kPlant, 28.0);
    EXPECT_EQ(m.u_r, 28.0);
    EXPECT_NEAR(m.output(), 28.0, 1e-9);
    const double dt = 1e-5;
    for (int k = 0; k < 1000; ++k) m.x_r = rk4_step(ss.A, ss.b, m.x_r, m.u_r, dt);
    EXPECT_NEAR(m.output(), 28.0, 1e-6);
}
