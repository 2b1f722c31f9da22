#pragma once

#include <cmath>

#include "antibunch/constants.hpp"
#include "antibunch/irf.hpp"
#include "antibunch/types.hpp"

// Closed-form two-level-system quantities: steady-state intensities,
// second-order correlation models, linewidths, TCSPC decay. All pure
// functions; safe to call concurrently.

namespace antibunch {

// Relative T1/T2 distance below which the two-pole form of the weak-pump
// g2 switches to its analytic T1 = T2 limit.
inline constexpr double g2_equal_t_branch_tol = 1e-4;

// Saturation parameter s = Omega^2 T1 T2 with Omega^2 = beta * P0.
inline double saturation_parameter(const EmitterParams& e, const DriveParams& d) {
    e.validate();
    d.validate();
    return d.omega_squared() * e.t1_ps * e.t2_ps;
}

// Excited-state occupation of the resonantly driven two-level system,
// rho_ee = (1/2) s/(1+s). Monotone in power, asymptote 1/2.
inline double resonant_intensity(const EmitterParams& e, const DriveParams& d) {
    if (d.laser_detuning_rad_per_ps != 0.0)
        throw invalid_params(
            "resonant_intensity requires zero laser detuning (use detuned_intensity)");
    const double s = saturation_parameter(e, d);
    return 0.5 * s / (1.0 + s);
}

// Detuned steady state rho_ee(delta) = (1/2) s / (1 + s + (delta T2)^2).
inline double detuned_intensity(const EmitterParams& e, const DriveParams& d) {
    const double s = saturation_parameter(e, d);
    const double dt2 = d.laser_detuning_rad_per_ps * e.t2_ps;
    return 0.5 * s / (1.0 + s + dt2 * dt2);
}

// g2(tau) = 1 - rho^2 exp(-|tau|/t_m): background-diluted antibunching.
inline double g2_background(double tau_ps, const G2BackgroundModel& m) {
    m.validate();
    return 1.0 - m.rho * m.rho * std::exp(-std::abs(tau_ps) / m.t_m_ps);
}

inline ExpMixture g2_background_mixture(const G2BackgroundModel& m) {
    m.validate();
    return ExpMixture{1.0, {{ExpTerm::Kind::exp_abs, -m.rho * m.rho, m.t_m_ps}}};
}

// Weak-pump resonant g2. For T1 != T2 the two-pole form
//   1 - (1 - T1/T2)^-1 exp(-|tau|/T2) - (1 - T2/T1)^-1 exp(-|tau|/T1),
// whose poles cancel at tau = 0 (g2(0) = 0 identically). Near T1 = T2 the
// analytic limit 1 - (1 + |tau|/T) exp(-|tau|/T) with T = (T1+T2)/2 keeps
// the evaluation stable.
inline ExpMixture g2_resonant_weak_mixture(const EmitterParams& e) {
    e.validate();
    const double t1 = e.t1_ps, t2 = e.t2_ps;
    if (std::abs(t1 / t2 - 1.0) < g2_equal_t_branch_tol) {
        const double t = 0.5 * (t1 + t2);
        return ExpMixture{1.0,
                          {{ExpTerm::Kind::exp_abs, -1.0, t},
                           {ExpTerm::Kind::texp_abs, -1.0 / t, t}}};
    }
    // c1 + c2 = 1 identically; computing c1 as the exact complement keeps
    // the pole cancellation at tau = 0 exact in floating point
    const double c2 = 1.0 / (1.0 - t1 / t2);
    const double c1 = 1.0 - c2;
    return ExpMixture{1.0,
                      {{ExpTerm::Kind::exp_abs, -c2, t2},
                       {ExpTerm::Kind::exp_abs, -c1, t1}}};
}

inline double g2_resonant_weak(double tau_ps, const EmitterParams& e) {
    return g2_resonant_weak_mixture(e).eval_raw(tau_ps);
}

// T2 = 2 hbar / Gamma0, Gamma0 the zero-power emission linewidth [ueV].
inline double t2_from_linewidth(double gamma0_uev) {
    if (!(gamma0_uev > 0))
        throw invalid_params("t2_from_linewidth: linewidth must be > 0");
    return 2.0 * hbar_uev_ps / gamma0_uev;
}

inline double linewidth_from_t2(double t2_ps) {
    if (!(t2_ps > 0)) throw invalid_params("linewidth_from_t2: t2 must be > 0");
    return 2.0 * hbar_uev_ps / t2_ps;
}

// Power-broadened linewidth Gamma(P0) = Gamma0 sqrt(1+s) [ueV]. Matches the
// FWHM of detuned_intensity over delta, converted to energy.
inline double power_broadened_fwhm(const EmitterParams& e, const DriveParams& d) {
    const double s = saturation_parameter(e, d);
    return linewidth_from_t2(e.t2_ps) * std::sqrt(1.0 + s);
}

// TCSPC decay: exp(-t/T1) for t >= 0 (zero before), convolved with the
// Gaussian IRF.
inline ExpMixture tcspc_decay_mixture(const EmitterParams& e) {
    e.validate();
    return ExpMixture{0.0, {{ExpTerm::Kind::exp_step, 1.0, e.t1_ps}}};
}

inline double tcspc_decay(double t_ps, const EmitterParams& e, const IrfParams& irf) {
    irf.validate();
    return tcspc_decay_mixture(e).eval_convolved(t_ps, sigma_from_fwhm(irf.fwhm_ps));
}

}  // namespace antibunch
