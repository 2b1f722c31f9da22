#include <gtest/gtest.h>

#include "antibunch/physics.hpp"
#include "oracles.hpp"

using namespace antibunch;

// detuned_intensity against an independently integrated optical-Bloch ODE
// on an (s, delta) grid. The closed-form steady state is not printed in the
// paper, so it is validated rather than trusted.
TEST(BlochOracle, SteadyStateMatchesClosedForm) {
    EmitterParams e;
    e.t1_ps = 670;
    e.t2_ps = 460;

    struct Point {
        double s;
        double delta_t2;  // delta in units of 1/T2
    };
    const Point grid[] = {
        {0.05, 0.0}, {0.2, 0.0},  {0.2, 0.5}, {0.2, 2.0}, {1.0, 0.0},
        {1.0, 1.0},  {3.0, -1.5}, {5.0, 0.7}, {10.0, 0.0}, {10.0, -3.0},
    };
    for (const auto& pt : grid) {
        DriveParams d;
        d.beta_rad2_per_ps2_per_nw = 1e-8;
        d.power_nw = pt.s / (d.beta_rad2_per_ps2_per_nw * e.t1_ps * e.t2_ps);
        d.laser_detuning_rad_per_ps = pt.delta_t2 / e.t2_ps;
        const double ode = oracle::bloch_steady_state(e, d);
        const double closed = detuned_intensity(e, d);
        EXPECT_NEAR(ode / closed, 1.0, 1e-8) << "s=" << pt.s << " dT2=" << pt.delta_t2;
    }
}

// Same oracle with strong dephasing (T2 << T1), the regime used by the
// background-dilution fixtures.
TEST(BlochOracle, SteadyStateStrongDephasing) {
    EmitterParams e;
    e.t1_ps = 670;
    e.t2_ps = 10;
    for (double s : {0.25, 1.0}) {
        DriveParams d;
        d.beta_rad2_per_ps2_per_nw = 1e-8;
        d.power_nw = s / (d.beta_rad2_per_ps2_per_nw * e.t1_ps * e.t2_ps);
        EXPECT_NEAR(oracle::bloch_steady_state(e, d) / detuned_intensity(e, d), 1.0, 1e-8);
    }
}
