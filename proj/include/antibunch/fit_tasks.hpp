#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "antibunch/correlate.hpp"
#include "antibunch/fit.hpp"
#include "antibunch/models.hpp"

// Task-level fitting: histogram fits with g2(0) extraction, doublet scans
// with splitting propagation, and joint saturation/linewidth power series.

namespace antibunch {

// Builds a FitProblem from a normalized histogram. Weights are the Poisson
// errors propagated through the normalization (sigma column).
inline FitProblem histogram_problem(const CorrelationHistogram& h, const std::string& model_id,
                                    IrfParams irf = {},
                                    std::vector<double> init = {},
                                    std::vector<bool> fixed = {}) {
    if (!h.is_normalized)
        throw invalid_params("histogram fit needs a normalized histogram");
    FitProblem p;
    p.model = make_model(model_id, irf);
    p.x.reserve(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) p.x.push_back(double(h.center_ps(i)));
    p.y = h.normalized;
    p.sigma_y = h.sigma;
    p.init = init.empty() ? initial_guess(model_id, p.x, p.y) : std::move(init);
    p.fixed = std::move(fixed);
    return p;
}

struct G2ZeroReport {
    double convolved = 0;
    double convolved_sigma = 0;
    double deconvolved = 0;
    double deconvolved_sigma = 0;
    FitResult fit;
};

// Fits the IRF-convolved model, then reports the model value at tau = 0
// both as fitted (convolved) and with the IRF removed (deconvolved).
// Uncertainties propagate from the fit covariance by the delta method.
inline G2ZeroReport extract_g2_zero(const CorrelationHistogram& h, const std::string& model_id,
                                    IrfParams irf = {},
                                    std::vector<double> init = {},
                                    std::vector<bool> fixed = {}) {
    G2ZeroReport rep;
    auto prob = histogram_problem(h, model_id, irf, std::move(init), std::move(fixed));
    rep.fit = fit(prob);

    const auto delta_sigma = [&](const FitModel& m, std::span<const double> p) {
        std::vector<double> g(m.n_params());
        m.grad(0.0, p, 0, g);
        double var = 0;
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = 0; b < g.size(); ++b)
                var += g[a] * rep.fit.covariance[a][b] * g[b];
        return std::sqrt(std::max(var, 0.0));
    };

    rep.convolved = prob.model->eval(0.0, rep.fit.params, 0);
    rep.convolved_sigma = delta_sigma(*prob.model, rep.fit.params);

    const auto bare = make_model(model_id, IrfParams{0.0});
    rep.deconvolved = bare->eval(0.0, rep.fit.params, 0);
    rep.deconvolved_sigma = delta_sigma(*bare, rep.fit.params);
    return rep;
}

struct DoubletReport {
    FitResult fit;
    double splitting_uev = 0;
    double splitting_sigma_uev = 0;
    double fwhm_uev = 0;
    double weight1 = 0;  // relative line strengths
    double weight2 = 0;
    bool resolvable = true;
};

// Two Lorentzian components with a common width plus constant background.
// The splitting uncertainty propagates through the center covariance; peaks
// closer than a quarter linewidth are flagged unresolvable but the
// splitting is still reported.
inline DoubletReport fit_doublet_scan(const std::vector<double>& x,
                                      const std::vector<double>& y,
                                      const std::vector<double>& sigma_y,
                                      std::vector<double> init = {}) {
    FitProblem p;
    p.model = make_model("lorentzian_doublet");
    p.x = x;
    p.y = y;
    p.sigma_y = sigma_y;
    p.init = init.empty() ? initial_guess("lorentzian_doublet", x, y) : std::move(init);

    DoubletReport rep;
    rep.fit = fit(p);
    const auto& q = rep.fit.params;
    rep.splitting_uev = std::abs(q[3] - q[1]);
    const auto& c = rep.fit.covariance;
    rep.splitting_sigma_uev = std::sqrt(std::max(c[1][1] + c[3][3] - 2.0 * c[1][3], 0.0));
    rep.fwhm_uev = q[4];
    const double total = q[0] + q[2];
    rep.weight1 = total > 0 ? q[0] / total : 0.5;
    rep.weight2 = total > 0 ? q[2] / total : 0.5;
    rep.resolvable = rep.splitting_uev >= 0.25 * rep.fwhm_uev;
    return rep;
}

struct PowerSeriesReport {
    FitResult fit;
    double gamma0_uev = 0;        // zero-power linewidth 2 hbar / t2
    double t2_from_gamma0_ps = 0; // round trip through the linewidth relation
    bool has_linewidth_data = false;
};

// Joint (or intensity-only) fit of the saturation law and the
// power-broadened linewidth. Intensity-only data leaves the t1/t2/beta
// product degenerate; the engine flags that direction unless beta (or one
// of the times) is fixed.
inline PowerSeriesReport fit_power_series(
    const std::vector<double>& power_nw_intensity, const std::vector<double>& intensity,
    const std::vector<double>& intensity_sigma, const std::vector<double>& power_nw_linewidth,
    const std::vector<double>& linewidth_uev, const std::vector<double>& linewidth_sigma,
    std::optional<double> fixed_beta = std::nullopt, std::vector<double> init = {}) {
    if (power_nw_intensity.size() < 4)
        throw invalid_params("fit_power_series: need at least 4 power points");

    FitProblem p;
    p.model = make_model("power_series_joint");
    for (std::size_t i = 0; i < power_nw_intensity.size(); ++i) {
        p.x.push_back(power_nw_intensity[i]);
        p.y.push_back(intensity[i]);
        p.sigma_y.push_back(intensity_sigma[i]);
        p.kind.push_back(0);
    }
    for (std::size_t i = 0; i < power_nw_linewidth.size(); ++i) {
        p.x.push_back(power_nw_linewidth[i]);
        p.y.push_back(linewidth_uev[i]);
        p.sigma_y.push_back(linewidth_sigma[i]);
        p.kind.push_back(1);
    }
    p.init = init.empty() ? initial_guess("power_series_joint", power_nw_intensity, intensity)
                          : std::move(init);
    p.fixed.assign(4, false);
    if (fixed_beta) {
        p.init[3] = *fixed_beta;
        p.fixed[3] = true;
    }

    PowerSeriesReport rep;
    rep.has_linewidth_data = !power_nw_linewidth.empty();
    rep.fit = fit(p);
    rep.gamma0_uev = linewidth_from_t2(rep.fit.params[2]);
    rep.t2_from_gamma0_ps = t2_from_linewidth(rep.gamma0_uev);
    return rep;
}

}  // namespace antibunch
