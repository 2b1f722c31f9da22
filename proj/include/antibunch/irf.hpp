#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "antibunch/constants.hpp"
#include "antibunch/math.hpp"
#include "antibunch/types.hpp"

namespace antibunch {

// Sum-of-exponentials representation of a model curve. Everything the
// analytic models produce (g2 dips, TCSPC decays) is a constant plus
// exponential terms in |t| or t, so Gaussian IRF convolution has a closed
// complementary-error-function form per term.
struct ExpTerm {
    enum class Kind {
        exp_abs,   // coeff * exp(-|t|/tdecay)
        texp_abs,  // coeff * |t| * exp(-|t|/tdecay)
        exp_step,  // coeff * theta(t) * exp(-t/tdecay)
    };
    Kind kind = Kind::exp_abs;
    double coeff = 0;
    double tdecay_ps = 1;
};

struct ExpMixture {
    double constant = 0;
    std::vector<ExpTerm> terms;

    double eval_raw(double t) const {
        double y = constant;
        for (const auto& term : terms) {
            switch (term.kind) {
                case ExpTerm::Kind::exp_abs:
                    y += term.coeff * std::exp(-std::abs(t) / term.tdecay_ps);
                    break;
                case ExpTerm::Kind::texp_abs:
                    y += term.coeff * std::abs(t) * std::exp(-std::abs(t) / term.tdecay_ps);
                    break;
                case ExpTerm::Kind::exp_step:
                    y += t < 0 ? 0.0 : term.coeff * std::exp(-t / term.tdecay_ps);
                    break;
            }
        }
        return y;
    }

    // Gaussian-convolved evaluation (closed form). sigma = 0 falls back to raw.
    double eval_convolved(double t, double sigma) const {
        if (sigma <= 0) return eval_raw(t);
        double y = constant;
        for (const auto& term : terms) {
            switch (term.kind) {
                case ExpTerm::Kind::exp_abs:
                    y += term.coeff * exp_abs_gauss(t, term.tdecay_ps, sigma);
                    break;
                case ExpTerm::Kind::texp_abs:
                    y += term.coeff * texp_abs_gauss(t, term.tdecay_ps, sigma);
                    break;
                case ExpTerm::Kind::exp_step:
                    y += term.coeff * exp_step_gauss(t, term.tdecay_ps, sigma);
                    break;
            }
        }
        return y;
    }
};

// Gaussian IRF convolution of an arbitrary integrable model by adaptive
// quadrature. The integrand is split at the model's potential kink (the
// point where t - x = 0) so each panel is smooth. Non-convergence reports
// the tau at fault.
inline double convolve_numeric(const std::function<double(double)>& model, double t,
                               double sigma, double tol = 1e-9) {
    if (sigma <= 0) return model(t);
    const double span = 8.5 * sigma;
    const auto integrand = [&](double x) {
        return model(t - x) * std::exp(-0.5 * (x / sigma) * (x / sigma)) /
               (sigma * std::sqrt(2.0 * M_PI));
    };
    try {
        if (std::abs(t) < span) {
            return integrate_adaptive(integrand, -span, t, 0.5 * tol) +
                   integrate_adaptive(integrand, t, span, 0.5 * tol);
        }
        return integrate_adaptive(integrand, -span, span, tol);
    } catch (const quadrature_error&) {
        throw quadrature_error("IRF convolution did not converge at tau = " +
                               std::to_string(t) + " ps");
    }
}

// convolve_with_irf: returns the Gaussian-convolved function. The mixture
// overload uses the closed erfc form; the generic overload numeric
// quadrature. fwhm = 0 returns the model unchanged.
inline std::function<double(double)> convolve_with_irf(ExpMixture mixture,
                                                       const IrfParams& irf) {
    irf.validate();
    const double sigma = sigma_from_fwhm(irf.fwhm_ps);
    return [mixture = std::move(mixture), sigma](double t) {
        return mixture.eval_convolved(t, sigma);
    };
}

inline std::function<double(double)> convolve_with_irf(
    std::function<double(double)> model, const IrfParams& irf) {
    irf.validate();
    if (irf.fwhm_ps <= 0) return model;
    const double sigma = sigma_from_fwhm(irf.fwhm_ps);
    return [model = std::move(model), sigma](double t) {
        return convolve_numeric(model, t, sigma);
    };
}

}  // namespace antibunch
