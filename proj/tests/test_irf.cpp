#include <gtest/gtest.h>

#include <cmath>

#include "antibunch/physics.hpp"
#include "oracles.hpp"

using namespace antibunch;

namespace {

EmitterParams emitter_670_460() {
    EmitterParams e;
    e.t1_ps = 670;
    e.t2_ps = 460;
    return e;
}

}  // namespace

TEST(Erfcx, MatchesDefinitionAndAsymptotics) {
    for (double x : {0.0, 0.1, 0.5, 1.0, 3.0, 5.9}) {
        EXPECT_NEAR(erfcx(x), std::exp(x * x) * std::erfc(x), 1e-12 * erfcx(x));
    }
    // both branches against mpmath references around the switch at x = 6
    EXPECT_NEAR(erfcx(6.0), 0.09277656780053835, 1e-13);        // series branch
    EXPECT_NEAR(erfcx(5.9999999), 0.09277656930657373, 1e-13);  // exp*erfc branch
    // large-argument asymptote 1/(x sqrt(pi))
    EXPECT_NEAR(erfcx(100.0) * 100.0 * std::sqrt(M_PI), 1.0, 1e-4);
    EXPECT_NEAR(erfcx(40.0), 0.014100335983377814, 1e-12 * 0.0141);  // mpmath
    // reflection
    EXPECT_NEAR(erfcx(-0.5), 2.0 * std::exp(0.25) - erfcx(0.5), 1e-14);
}

TEST(ConvolveWithIrf, ZeroFwhmIsIdentity) {
    EmitterParams e = emitter_670_460();
    auto conv = convolve_with_irf(g2_resonant_weak_mixture(e), IrfParams{0.0});
    for (double tau : {-3000.0, -500.0, 0.0, 250.0, 4000.0})
        EXPECT_DOUBLE_EQ(conv(tau), g2_resonant_weak(tau, e));

    auto generic = convolve_with_irf(
        std::function<double(double)>([&](double t) { return g2_resonant_weak(t, e); }),
        IrfParams{0.0});
    EXPECT_DOUBLE_EQ(generic(123.0), g2_resonant_weak(123.0, e));
}

TEST(ConvolveWithIrf, ClosedFormAgreesWithQuadrature) {
    // dual-path check on a tau grid of [-5, 5] ns
    EmitterParams e = emitter_670_460();
    const IrfParams irf{400.0};
    auto closed = convolve_with_irf(g2_resonant_weak_mixture(e), irf);
    auto numeric = convolve_with_irf(
        std::function<double(double)>([&](double t) { return g2_resonant_weak(t, e); }), irf);
    for (double tau = -5000; tau <= 5000; tau += 250)
        EXPECT_NEAR(closed(tau), numeric(tau), 1e-6) << "tau=" << tau;
}

TEST(ConvolveWithIrf, ClosedFormAgreesWithIndependentSimpson) {
    EmitterParams e = emitter_670_460();
    const double sigma = sigma_from_fwhm(400.0);
    auto closed = convolve_with_irf(g2_resonant_weak_mixture(e), IrfParams{400.0});
    auto raw = [&](double t) { return g2_resonant_weak(t, e); };
    for (double tau : {0.0, 170.0, 800.0, 2400.0})
        EXPECT_NEAR(closed(tau), oracle::gauss_convolve(raw, tau, sigma), 1e-8);
}

TEST(ConvolveWithIrf, ConvolvedDipDepth670_460_400) {
    // frozen by the quadrature oracle: the 400 ps FWHM Gaussian fills the
    // T1=670/T2=460 dip to ~0.0342 at tau = 0
    EmitterParams e = emitter_670_460();
    auto conv = convolve_with_irf(g2_resonant_weak_mixture(e), IrfParams{400.0});
    EXPECT_NEAR(conv(0.0), 0.0342100022529, 1e-9);
    // deconvolved value stays exactly zero (pole cancellation)
    EXPECT_NEAR(g2_resonant_weak(0.0, e), 0.0, 1e-15);
}

TEST(ConvolveWithIrf, TinyFwhmConvergesPointwise) {
    EmitterParams e = emitter_670_460();
    auto conv = convolve_with_irf(g2_resonant_weak_mixture(e), IrfParams{1e-3});
    for (double tau : {0.0, 100.0, 460.0, 2000.0})
        EXPECT_NEAR(conv(tau), g2_resonant_weak(tau, e), 1e-6);

    const G2BackgroundModel m{std::sqrt(0.8), 500.0};
    auto conv2 = convolve_with_irf(g2_background_mixture(m), IrfParams{1e-3});
    for (double tau : {0.0, 250.0, 5000.0})
        EXPECT_NEAR(conv2(tau), g2_background(tau, m), 1e-6);
}

TEST(ConvolveWithIrf, BackgroundModelDepthUnderIrf) {
    // Eq-2-style dip under a wide IRF: depth shrinks, symmetry holds
    const G2BackgroundModel m{std::sqrt(0.8), 500.0};
    auto conv = convolve_with_irf(g2_background_mixture(m), IrfParams{400.0});
    EXPECT_GT(conv(0.0), g2_background(0.0, m));
    EXPECT_LT(conv(0.0), 1.0);
    for (double tau : {120.0, 730.0, 1900.0}) EXPECT_NEAR(conv(tau), conv(-tau), 1e-12);
    EXPECT_NEAR(conv(30000.0), 1.0, 1e-9);
}

TEST(ExpGaussDerivatives, MatchFiniteDifferences) {
    const double sigma = 170.0;
    for (double T : {40.0, 460.0, 1200.0}) {
        for (double t : {-900.0, -50.0, 0.0, 35.0, 700.0, 5000.0}) {
            const double h = 1e-4 * T;
            const double fd_abs =
                (exp_abs_gauss(t, T + h, sigma) - exp_abs_gauss(t, T - h, sigma)) / (2 * h);
            EXPECT_NEAR(exp_abs_gauss_dT(t, T, sigma), fd_abs, 1e-7 + 1e-6 * std::abs(fd_abs));

            const double fd_texp =
                (texp_abs_gauss(t, T + h, sigma) - texp_abs_gauss(t, T - h, sigma)) / (2 * h);
            EXPECT_NEAR(texp_abs_gauss_dT(t, T, sigma), fd_texp, 1e-6 + 1e-6 * std::abs(fd_texp));

            const double fd_step =
                (exp_step_gauss(t, T + h, sigma) - exp_step_gauss(t, T - h, sigma)) / (2 * h);
            EXPECT_NEAR(exp_step_gauss_dT(t, T, sigma), fd_step, 1e-7 + 1e-6 * std::abs(fd_step));
        }
    }
}

TEST(ExpGaussPrimitives, ReduceToRawFunctions) {
    // sigma -> 0 recovers the unconvolved kernels away from the kink;
    // at t = 0 the deviation is the expected sqrt(2/pi) sigma/T
    const double sigma = 1e-4;
    for (double T : {100.0, 650.0}) {
        for (double t : {-400.0, 90.0, 2000.0}) {
            EXPECT_NEAR(exp_abs_gauss(t, T, sigma), std::exp(-std::abs(t) / T), 1e-10);
            EXPECT_NEAR(texp_abs_gauss(t, T, sigma), std::abs(t) * std::exp(-std::abs(t) / T),
                        1e-8 * std::max(1.0, std::abs(t)));
        }
        const double kink = std::sqrt(2.0 / M_PI) * sigma / T;
        EXPECT_NEAR(exp_abs_gauss(0.0, T, sigma), 1.0, 1.5 * kink);
        EXPECT_NEAR(texp_abs_gauss(0.0, T, sigma), 0.0, 1.5 * std::sqrt(2.0 / M_PI) * sigma);
        EXPECT_NEAR(exp_step_gauss(900.0, T, sigma), std::exp(-900.0 / T), 1e-10);
        EXPECT_NEAR(exp_step_gauss(-900.0, T, sigma), 0.0, 1e-12);
    }
}
