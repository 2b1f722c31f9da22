#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace antibunch {

// Thrown by validate() methods and config parsing on bad parameters.
class invalid_params : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Two-level emitter: radiative lifetime T1, emission coherence time T2
// (T2 <= 2*T1), transition energy, optional fine-structure doublet.
struct EmitterParams {
    double t1_ps = 0;
    double t2_ps = 0;
    double transition_energy_uev = 0;
    std::optional<double> fss_splitting_uev;           // doublet separation
    std::optional<std::array<double, 2>> fss_weights;  // relative line strengths

    void validate() const {
        if (!(t1_ps > 0)) throw invalid_params("EmitterParams: t1_ps must be > 0");
        if (!(t2_ps > 0)) throw invalid_params("EmitterParams: t2_ps must be > 0");
        if (t2_ps > 2.0 * t1_ps)
            throw invalid_params("EmitterParams: coherence bound violated (t2 > 2*t1)");
        if (fss_splitting_uev && !(*fss_splitting_uev > 0))
            throw invalid_params("EmitterParams: fss_splitting_uev must be > 0");
        if (fss_weights) {
            for (double w : *fss_weights)
                if (!(w > 0)) throw invalid_params("EmitterParams: fss_weights must be > 0");
        }
    }
};

// Resonant cw drive. Omega^2 = beta * power.
struct DriveParams {
    double power_nw = 0;
    double beta_rad2_per_ps2_per_nw = 0;
    double laser_detuning_rad_per_ps = 0;  // delta

    void validate() const {
        if (!(power_nw >= 0)) throw invalid_params("DriveParams: power_nw must be >= 0");
        if (!(beta_rad2_per_ps2_per_nw > 0))
            throw invalid_params("DriveParams: beta must be > 0");
        if (!std::isfinite(laser_detuning_rad_per_ps))
            throw invalid_params("DriveParams: laser_detuning must be finite");
    }

    double omega_squared() const { return beta_rad2_per_ps2_per_nw * power_nw; }
    double omega() const { return std::sqrt(omega_squared()); }
};

// Gaussian instrument response. fwhm = 0 denotes ideal (deconvolved) response.
struct IrfParams {
    double fwhm_ps = 0;

    void validate() const {
        if (!(fwhm_ps >= 0)) throw invalid_params("IrfParams: fwhm_ps must be >= 0");
    }
};

// Background-diluted g2 model: g2(tau) = 1 - rho^2 exp(-|tau|/t_m),
// rho = S/(S+B).
struct G2BackgroundModel {
    double rho = 1.0;
    double t_m_ps = 0;

    void validate() const {
        if (!(rho >= 0 && rho <= 1))
            throw invalid_params("G2BackgroundModel: rho must be in [0,1]");
        if (!(t_m_ps > 0)) throw invalid_params("G2BackgroundModel: t_m_ps must be > 0");
    }
};

}  // namespace antibunch
