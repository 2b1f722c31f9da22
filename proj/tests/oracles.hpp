#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately separate from the library code paths they check: plain
// fixed-step integrators and brute-force counting, no shared helpers.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "antibunch/types.hpp"

namespace oracle {

// Steady state of the optical Bloch equations by RK4 time integration of
// (rho_ee, Re rho_eg, Im rho_eg) from the ground state.
//   p'  =  Omega ci - p/T1
//   cr' = -delta ci - cr/T2
//   ci' =  delta cr + (Omega/2)(1 - 2p) - ci/T2
inline double bloch_steady_state(const antibunch::EmitterParams& e,
                                 const antibunch::DriveParams& d) {
    const double t1 = e.t1_ps, t2 = e.t2_ps;
    const double om = d.omega();
    const double delta = d.laser_detuning_rad_per_ps;
    struct State {
        double p, cr, ci;
    };
    auto deriv = [&](const State& s) {
        return State{om * s.ci - s.p / t1, -delta * s.ci - s.cr / t2,
                     delta * s.cr + 0.5 * om * (1.0 - 2.0 * s.p) - s.ci / t2};
    };
    double scale = std::min(t1, t2);
    if (om > 0) scale = std::min(scale, 1.0 / om);
    if (delta != 0) scale = std::min(scale, 1.0 / std::abs(delta));
    const double dt = scale / 200.0;
    const double t_end = 80.0 * std::max(t1, t2);
    State s{0, 0, 0};
    for (double t = 0; t < t_end; t += dt) {
        const State k1 = deriv(s);
        const State s2{s.p + 0.5 * dt * k1.p, s.cr + 0.5 * dt * k1.cr,
                       s.ci + 0.5 * dt * k1.ci};
        const State k2 = deriv(s2);
        const State s3{s.p + 0.5 * dt * k2.p, s.cr + 0.5 * dt * k2.cr,
                       s.ci + 0.5 * dt * k2.ci};
        const State k3 = deriv(s3);
        const State s4{s.p + dt * k3.p, s.cr + dt * k3.cr, s.ci + dt * k3.ci};
        const State k4 = deriv(s4);
        s.p += dt / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
        s.cr += dt / 6.0 * (k1.cr + 2 * k2.cr + 2 * k3.cr + k4.cr);
        s.ci += dt / 6.0 * (k1.ci + 2 * k2.ci + 2 * k3.ci + k4.ci);
    }
    return s.p;
}

// Normalized conditional re-excitation g2(tau) = rho_ee(tau | ground)/rho_ee(ss)
// from the same full master equation, on resonance or detuned.
inline std::vector<double> bloch_g2(const antibunch::EmitterParams& e,
                                    const antibunch::DriveParams& d,
                                    const std::vector<double>& taus) {
    const double t1 = e.t1_ps, t2 = e.t2_ps;
    const double om = d.omega();
    const double delta = d.laser_detuning_rad_per_ps;
    struct State {
        double p, cr, ci;
    };
    auto deriv = [&](const State& s) {
        return State{om * s.ci - s.p / t1, -delta * s.ci - s.cr / t2,
                     delta * s.cr + 0.5 * om * (1.0 - 2.0 * s.p) - s.ci / t2};
    };
    const double pss = bloch_steady_state(e, d);
    double scale = std::min(t1, t2);
    if (om > 0) scale = std::min(scale, 1.0 / om);
    const double dt = scale / 400.0;
    std::vector<double> out;
    out.reserve(taus.size());
    State s{0, 0, 0};
    double t = 0;
    for (double tau : taus) {
        while (t < tau) {
            const State k1 = deriv(s);
            const State s2{s.p + 0.5 * dt * k1.p, s.cr + 0.5 * dt * k1.cr,
                           s.ci + 0.5 * dt * k1.ci};
            const State k2 = deriv(s2);
            const State s3{s.p + 0.5 * dt * k2.p, s.cr + 0.5 * dt * k2.cr,
                           s.ci + 0.5 * dt * k2.ci};
            const State k3 = deriv(s3);
            const State s4{s.p + dt * k3.p, s.cr + dt * k3.cr, s.ci + dt * k3.ci};
            const State k4 = deriv(s4);
            s.p += dt / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
            s.cr += dt / 6.0 * (k1.cr + 2 * k2.cr + 2 * k3.cr + k4.cr);
            s.ci += dt / 6.0 * (k1.ci + 2 * k2.ci + 2 * k3.ci + k4.ci);
            t += dt;
        }
        out.push_back(s.p / pss);
    }
    return out;
}

// Plain composite-Simpson Gaussian convolution, independent of the
// library quadrature (fixed grid, no adaptivity).
inline double gauss_convolve(const std::function<double(double)>& f, double t,
                             double sigma, int n = 8001) {
    const double a = t - 9.0 * sigma, b = t + 9.0 * sigma;
    const double h = (b - a) / (n - 1);
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a + i * h;
        const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const double g =
            std::exp(-0.5 * (x - t) * (x - t) / (sigma * sigma)) / (sigma * std::sqrt(2.0 * M_PI));
        acc += w * f(x) * g;
    }
    return acc * h / 3.0;
}

// FWHM of a peaked even function of delta by bisection on each side of 0.
inline double numeric_fwhm(const std::function<double(double)>& f, double peak_at,
                           double half_height, double hi_bracket) {
    double lo = peak_at, hi = hi_bracket;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > half_height)
            lo = mid;
        else
            hi = mid;
    }
    return 2.0 * (0.5 * (lo + hi) - peak_at);
}

// Central finite-difference gradient of f at p.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> p, double rel_step = 1e-6) {
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double h = rel_step * std::max(std::abs(p[i]), 1e-3);
        const double save = p[i];
        p[i] = save + h;
        const double fp = f(p);
        p[i] = save - h;
        const double fm = f(p);
        p[i] = save;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Quadratic brute-force pair histogram: every ordered pair (start, stop)
// binned by tau = t_stop - t_start into [b*w - w/2, b*w + w/2).
inline std::vector<std::uint64_t> brute_force_pairs(const std::vector<std::int64_t>& starts,
                                                    const std::vector<std::int64_t>& stops,
                                                    std::int64_t bin_w, std::int64_t nbins_half,
                                                    bool same_channel) {
    std::vector<std::uint64_t> h(2 * nbins_half + 1, 0);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        for (std::size_t j = 0; j < stops.size(); ++j) {
            if (same_channel && i == j) continue;
            const std::int64_t tau = stops[j] - starts[i];
            // floor((2 tau + w) / (2 w)) via floored integer division
            std::int64_t num = 2 * tau + bin_w, den = 2 * bin_w;
            std::int64_t b = num / den;
            if (num % den != 0 && num < 0) --b;
            if (b >= -nbins_half && b <= nbins_half) ++h[std::size_t(b + nbins_half)];
        }
    }
    return h;
}

}  // namespace oracle
