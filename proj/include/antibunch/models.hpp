#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "antibunch/constants.hpp"
#include "antibunch/math.hpp"
#include "antibunch/physics.hpp"

// Registered fit models with analytic gradients. IRF-aware models take the
// Gaussian IRF width at construction; the underlying (deconvolved) curve is
// the same model with fwhm = 0.

namespace antibunch {

// g2(tau) = 1 - rho^2 * conv[exp(-|tau|/t_m)]         params: rho, t_m_ps
class G2BackgroundIrfModel : public FitModel {
  public:
    explicit G2BackgroundIrfModel(IrfParams irf = {}) : sigma_(sigma_from_fwhm(irf.fwhm_ps)) {}

    std::string id() const override { return "g2_background_irf"; }
    const std::vector<ParamSpec>& param_specs() const override {
        static const std::vector<ParamSpec> specs{{"rho", 0.0, 1.0}, {"t_m_ps", 1e-3, 1e9}};
        return specs;
    }
    double eval(double x, std::span<const double> p, int) const override {
        return 1.0 - p[0] * p[0] * exp_abs_gauss(x, p[1], sigma_);
    }
    void grad(double x, std::span<const double> p, int, std::span<double> out) const override {
        const double f = exp_abs_gauss(x, p[1], sigma_);
        out[0] = -2.0 * p[0] * f;
        out[1] = -p[0] * p[0] * exp_abs_gauss_dT(x, p[1], sigma_);
    }

  private:
    double sigma_;
};

// Weak-pump resonant g2 under the IRF.                params: t1_ps, t2_ps
// Two-pole form away from t1 = t2, analytic limit inside the branch.
class G2ResonantWeakIrfModel : public FitModel {
  public:
    explicit G2ResonantWeakIrfModel(IrfParams irf = {}) : sigma_(sigma_from_fwhm(irf.fwhm_ps)) {}

    std::string id() const override { return "g2_resonant_weak_irf"; }
    const std::vector<ParamSpec>& param_specs() const override {
        static const std::vector<ParamSpec> specs{{"t1_ps", 1.0, 1e7}, {"t2_ps", 1.0, 1e7}};
        return specs;
    }
    double eval(double x, std::span<const double> p, int) const override {
        const double t1 = p[0], t2 = p[1];
        if (on_branch(t1, t2)) {
            const double t = 0.5 * (t1 + t2);
            return 1.0 - exp_abs_gauss(x, t, sigma_) - texp_abs_gauss(x, t, sigma_) / t;
        }
        const double c2 = 1.0 / (1.0 - t1 / t2);
        const double c1 = 1.0 - c2;
        return 1.0 - c2 * exp_abs_gauss(x, t2, sigma_) - c1 * exp_abs_gauss(x, t1, sigma_);
    }
    void grad(double x, std::span<const double> p, int, std::span<double> out) const override {
        const double t1 = p[0], t2 = p[1];
        if (on_branch(t1, t2)) {
            const double t = 0.5 * (t1 + t2);
            const double g = texp_abs_gauss(x, t, sigma_);
            const double d_dt = -exp_abs_gauss_dT(x, t, sigma_) + g / (t * t) -
                                texp_abs_gauss_dT(x, t, sigma_) / t;
            out[0] = 0.5 * d_dt;
            out[1] = 0.5 * d_dt;
            return;
        }
        const double c2 = 1.0 / (1.0 - t1 / t2);
        const double c1 = 1.0 - c2;
        const double f2 = exp_abs_gauss(x, t2, sigma_);
        const double f1 = exp_abs_gauss(x, t1, sigma_);
        // c2 = t2/(t2 - t1): dc2/dt1 = t2/(t2-t1)^2, dc2/dt2 = -t1/(t2-t1)^2
        const double d = t2 - t1;
        const double dc2_dt1 = t2 / (d * d);
        const double dc2_dt2 = -t1 / (d * d);
        out[0] = -dc2_dt1 * f2 + dc2_dt1 * f1 - c1 * exp_abs_gauss_dT(x, t1, sigma_);
        out[1] = -dc2_dt2 * f2 - c2 * exp_abs_gauss_dT(x, t2, sigma_) + dc2_dt2 * f1;
    }

  private:
    static bool on_branch(double t1, double t2) {
        return std::abs(t1 / t2 - 1.0) < g2_equal_t_branch_tol;
    }
    double sigma_;
};

// Lorentzian peak plus constant offset.
// params: amplitude, center_uev, fwhm_uev, offset
class LorentzianSingletModel : public FitModel {
  public:
    std::string id() const override { return "lorentzian_singlet"; }
    const std::vector<ParamSpec>& param_specs() const override {
        static const std::vector<ParamSpec> specs{{"amplitude", 0.0, 1e12},
                                                  {"center_uev"},
                                                  {"fwhm_uev", 1e-6, 1e9},
                                                  {"offset", -1e12, 1e12}};
        return specs;
    }
    double eval(double x, std::span<const double> p, int) const override {
        const double h = 0.5 * p[2], dx = x - p[1];
        return p[0] * h * h / (dx * dx + h * h) + p[3];
    }
    void grad(double x, std::span<const double> p, int, std::span<double> out) const override {
        const double h = 0.5 * p[2], dx = x - p[1];
        const double den = dx * dx + h * h;
        out[0] = h * h / den;
        out[1] = p[0] * h * h * 2.0 * dx / (den * den);
        out[2] = p[0] * h * dx * dx / (den * den);  // d/d(fwhm) = (1/2) d/dh
        out[3] = 1.0;
    }
};

// Two Lorentzian components sharing one width, plus constant offset.
// params: amp1, center1_uev, amp2, center2_uev, fwhm_uev, offset
class LorentzianDoubletModel : public FitModel {
  public:
    std::string id() const override { return "lorentzian_doublet"; }
    const std::vector<ParamSpec>& param_specs() const override {
        static const std::vector<ParamSpec> specs{
            {"amp1", 0.0, 1e12},   {"center1_uev"}, {"amp2", 0.0, 1e12},
            {"center2_uev"},       {"fwhm_uev", 1e-6, 1e9}, {"offset", -1e12, 1e12}};
        return specs;
    }
    double eval(double x, std::span<const double> p, int) const override {
        const double h = 0.5 * p[4];
        const double d1 = x - p[1], d2 = x - p[3];
        return p[0] * h * h / (d1 * d1 + h * h) + p[2] * h * h / (d2 * d2 + h * h) + p[5];
    }
    void grad(double x, std::span<const double> p, int, std::span<double> out) const override {
        const double h = 0.5 * p[4];
        const double d1 = x - p[1], d2 = x - p[3];
        const double den1 = d1 * d1 + h * h, den2 = d2 * d2 + h * h;
        out[0] = h * h / den1;
        out[1] = p[0] * h * h * 2.0 * d1 / (den1 * den1);
        out[2] = h * h / den2;
        out[3] = p[2] * h * h * 2.0 * d2 / (den2 * den2);
        out[4] = 0.5 * (p[0] * 2.0 * h * d1 * d1 / (den1 * den1) +
                        p[2] * 2.0 * h * d2 * d2 / (den2 * den2));
        out[5] = 1.0;
    }
};

// Emission saturation vs power: I(P) = amplitude * s/(1+s), s = beta P t1 t2.
// params: amplitude, t1_ps, t2_ps, beta  (x is power in nW)
// Intensity-only data constrains only amplitude and the product beta*t1*t2;
// the engine reports the degenerate direction unless enough is fixed.
class SaturationEq1Model : public FitModel {
  public:
    std::string id() const override { return "saturation_eq1"; }
    const std::vector<ParamSpec>& param_specs() const override {
        static const std::vector<ParamSpec> specs{{"amplitude", 0.0, 1e12},
                                                  {"t1_ps", 1e-3, 1e9},
                                                  {"t2_ps", 1e-3, 1e9},
                                                  {"beta_rad2_per_ps2_per_nw", 1e-30, 1e6}};
        return specs;
    }
    double eval(double x, std::span<const double> p, int) const override {
        const double s = p[3] * x * p[1] * p[2];
        return p[0] * s / (1.0 + s);
    }
    void grad(double x, std::span<const double> p, int, std::span<double> out) const override {
        const double s = p[3] * x * p[1] * p[2];
        const double den = (1.0 + s) * (1.0 + s);
        const double ds = p[0] / den;  // d(eval)/ds
        out[0] = s / (1.0 + s);
        out[1] = ds * p[3] * x * p[2];
        out[2] = ds * p[3] * x * p[1];
        out[3] = ds * x * p[1] * p[2];
    }
};

// TCSPC decay under the IRF: amplitude * conv[theta(t) exp(-t/T1)].
// params: amplitude, t1_ps
class TcspcDecayIrfModel : public FitModel {
  public:
    explicit TcspcDecayIrfModel(IrfParams irf = {}) : sigma_(sigma_from_fwhm(irf.fwhm_ps)) {}

    std::string id() const override { return "tcspc_decay_irf"; }
    const std::vector<ParamSpec>& param_specs() const override {
        static const std::vector<ParamSpec> specs{{"amplitude", 0.0, 1e12},
                                                  {"t1_ps", 1e-3, 1e9}};
        return specs;
    }
    double eval(double x, std::span<const double> p, int) const override {
        return p[0] * exp_step_gauss(x, p[1], sigma_);
    }
    void grad(double x, std::span<const double> p, int, std::span<double> out) const override {
        out[0] = exp_step_gauss(x, p[1], sigma_);
        out[1] = p[0] * exp_step_gauss_dT(x, p[1], sigma_);
    }

  private:
    double sigma_;
};

// Joint power series: intensity points (kind 0) follow the saturation law,
// linewidth points (kind 1) follow Gamma(P) = (2 hbar/t2) sqrt(1+s).
// params: amplitude, t1_ps, t2_ps, beta
class PowerSeriesJointModel : public FitModel {
  public:
    std::string id() const override { return "power_series_joint"; }
    const std::vector<ParamSpec>& param_specs() const override {
        static const std::vector<ParamSpec> specs{{"amplitude", 0.0, 1e12},
                                                  {"t1_ps", 1e-3, 1e9},
                                                  {"t2_ps", 1e-3, 1e9},
                                                  {"beta_rad2_per_ps2_per_nw", 1e-30, 1e6}};
        return specs;
    }
    double eval(double x, std::span<const double> p, int kind) const override {
        const double s = p[3] * x * p[1] * p[2];
        if (kind == 0) return p[0] * s / (1.0 + s);
        return 2.0 * hbar_uev_ps / p[2] * std::sqrt(1.0 + s);
    }
    void grad(double x, std::span<const double> p, int kind,
              std::span<double> out) const override {
        const double s = p[3] * x * p[1] * p[2];
        if (kind == 0) {
            const double den = (1.0 + s) * (1.0 + s);
            const double ds = p[0] / den;
            out[0] = s / (1.0 + s);
            out[1] = ds * p[3] * x * p[2];
            out[2] = ds * p[3] * x * p[1];
            out[3] = ds * x * p[1] * p[2];
            return;
        }
        const double g0 = 2.0 * hbar_uev_ps / p[2];
        const double root = std::sqrt(1.0 + s);
        const double ds = g0 / (2.0 * root);  // d(eval)/ds
        out[0] = 0.0;
        out[1] = ds * p[3] * x * p[2];
        out[2] = -g0 * root / p[2] + ds * p[3] * x * p[1];
        out[3] = ds * x * p[1] * p[2];
    }
};

inline std::shared_ptr<const FitModel> make_model(const std::string& id,
                                                  IrfParams irf = {}) {
    if (id == "g2_background_irf") return std::make_shared<G2BackgroundIrfModel>(irf);
    if (id == "g2_resonant_weak_irf") return std::make_shared<G2ResonantWeakIrfModel>(irf);
    if (id == "lorentzian_singlet") return std::make_shared<LorentzianSingletModel>();
    if (id == "lorentzian_doublet") return std::make_shared<LorentzianDoubletModel>();
    if (id == "saturation_eq1") return std::make_shared<SaturationEq1Model>();
    if (id == "tcspc_decay_irf") return std::make_shared<TcspcDecayIrfModel>(irf);
    if (id == "power_series_joint") return std::make_shared<PowerSeriesJointModel>();
    throw invalid_params("unknown model id: " + id);
}

inline const std::vector<std::string>& registered_model_ids() {
    static const std::vector<std::string> ids{
        "g2_background_irf", "g2_resonant_weak_irf", "lorentzian_singlet",
        "lorentzian_doublet", "saturation_eq1",      "tcspc_decay_irf",
        "power_series_joint"};
    return ids;
}

// Model-specific starting values from the data, used when no explicit
// initial guess is supplied.
inline std::vector<double> initial_guess(const std::string& id,
                                         const std::vector<double>& x,
                                         const std::vector<double>& y) {
    if (x.empty()) throw invalid_params("initial_guess: empty data");
    const auto minmax = std::minmax_element(y.begin(), y.end());
    const double ymin = *minmax.first, ymax = *minmax.second;

    if (id == "g2_background_irf" || id == "g2_resonant_weak_irf") {
        // dip depth fixes rho; t_m from the half-depth crossing of the dip
        const double depth = std::clamp(1.0 - ymin, 0.02, 1.0);
        double tau_half = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] <= 0) continue;
            if (y[i] >= 1.0 - 0.5 * depth) {
                tau_half = x[i];
                break;
            }
        }
        if (tau_half <= 0) tau_half = 0.25 * (x.back() - x.front());
        if (id == "g2_background_irf")
            return {std::sqrt(depth), tau_half / std::log(2.0)};
        // (1 + u) e^-u = 1/2 at u ~ 1.678
        const double t = tau_half / 1.678;
        return {1.25 * t, 0.8 * t};
    }
    if (id == "lorentzian_singlet") {
        const std::size_t imax = std::size_t(std::max_element(y.begin(), y.end()) - y.begin());
        const double amp = ymax - ymin;
        double fwhm = 0.25 * (x.back() - x.front());
        for (std::size_t i = imax; i < x.size(); ++i) {
            if (y[i] <= ymin + 0.5 * amp) {
                fwhm = 2.0 * (x[i] - x[imax]);
                break;
            }
        }
        return {amp, x[imax], std::max(fwhm, 1e-3), ymin};
    }
    if (id == "lorentzian_doublet") {
        // two highest local maxima of a lightly smoothed trace
        std::vector<double> s(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            double acc = 0;
            int n = 0;
            for (int k = -2; k <= 2; ++k) {
                const std::int64_t j = std::int64_t(i) + k;
                if (j >= 0 && j < std::int64_t(y.size())) {
                    acc += y[std::size_t(j)];
                    ++n;
                }
            }
            s[i] = acc / n;
        }
        std::vector<std::pair<double, double>> peaks;  // (value, x)
        for (std::size_t i = 1; i + 1 < s.size(); ++i)
            if (s[i] > s[i - 1] && s[i] >= s[i + 1]) peaks.push_back({s[i], x[i]});
        std::sort(peaks.rbegin(), peaks.rend());
        double c1, c2;
        if (peaks.size() >= 2) {
            c1 = peaks[0].second;
            c2 = peaks[1].second;
        } else {
            const std::size_t imax =
                std::size_t(std::max_element(y.begin(), y.end()) - y.begin());
            const double span = 0.05 * (x.back() - x.front());
            c1 = x[imax] - span;
            c2 = x[imax] + span;
        }
        if (c1 > c2) std::swap(c1, c2);
        const double amp = ymax - ymin;
        return {amp, c1, amp, c2, std::max(0.5 * (c2 - c1), 1e-3), ymin};
    }
    if (id == "saturation_eq1" || id == "power_series_joint") {
        // knee where the intensity reaches half its apparent plateau
        const double amp = 1.1 * ymax;
        double p_half = x[x.size() / 2];
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (y[i] >= 0.5 * amp) {
                p_half = std::max(x[i], 1e-12);
                break;
            }
        }
        const double t = std::sqrt(1.0 / (1e-8 * p_half));
        return {amp, t, t, 1e-8};
    }
    if (id == "tcspc_decay_irf") {
        const std::size_t imax = std::size_t(std::max_element(y.begin(), y.end()) - y.begin());
        double t1 = 0.2 * (x.back() - x.front());
        for (std::size_t i = imax; i < x.size(); ++i) {
            if (y[i] <= ymax * std::exp(-1.0)) {
                t1 = std::max(x[i] - x[imax], 1e-3);
                break;
            }
        }
        return {ymax, t1};
    }
    throw invalid_params("initial_guess: unknown model id " + id);
}

}  // namespace antibunch
