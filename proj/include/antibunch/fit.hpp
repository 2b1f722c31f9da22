#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "antibunch/types.hpp"

// Damped least-squares (Levenberg-Marquardt) engine for the model registry.
// Small, dependency-free: the normal equations are at most a handful of
// parameters, solved by Cholesky with a Jacobi eigendecomposition for the
// covariance and identifiability report.

namespace antibunch {

struct ParamSpec {
    std::string name;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

// Model interface. kind tags per-point data blocks in joint fits
// (0 for ordinary single-curve models). The default gradient is a central
// finite difference on eval; concrete models override it analytically.
class FitModel {
  public:
    virtual ~FitModel() = default;
    virtual std::string id() const = 0;
    virtual const std::vector<ParamSpec>& param_specs() const = 0;
    virtual double eval(double x, std::span<const double> p, int kind = 0) const = 0;

    virtual void grad(double x, std::span<const double> p, int kind,
                      std::span<double> out) const {
        std::vector<double> q(p.begin(), p.end());
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double h = 1e-6 * std::max(std::abs(q[i]), 1e-6);
            const double save = q[i];
            q[i] = save + h;
            const double fp = eval(x, q, kind);
            q[i] = save - h;
            const double fm = eval(x, q, kind);
            q[i] = save;
            out[i] = (fp - fm) / (2.0 * h);
        }
    }

    std::size_t n_params() const { return param_specs().size(); }
};

struct FitProblem {
    std::shared_ptr<const FitModel> model;
    std::vector<double> x, y, sigma_y;
    std::vector<int> kind;  // empty = all zero
    std::vector<double> init;
    std::vector<double> lower, upper;  // empty = take from the model specs
    std::vector<bool> fixed;           // empty = all free

    void validate() const {
        if (!model) throw invalid_params("FitProblem: no model");
        const std::size_t np = model->n_params();
        if (x.size() != y.size() || x.size() != sigma_y.size())
            throw invalid_params("FitProblem: x/y/sigma arrays must have equal length");
        if (!kind.empty() && kind.size() != x.size())
            throw invalid_params("FitProblem: kind array length mismatch");
        if (init.size() != np) throw invalid_params("FitProblem: init size mismatch");
        for (double s : sigma_y)
            if (!(s > 0)) throw invalid_params("FitProblem: sigma_y must be > 0");
        for (double v : init)
            if (!std::isfinite(v)) throw invalid_params("FitProblem: init must be finite");
        if (!lower.empty() && lower.size() != np)
            throw invalid_params("FitProblem: lower bounds size mismatch");
        if (!upper.empty() && upper.size() != np)
            throw invalid_params("FitProblem: upper bounds size mismatch");
        if (!fixed.empty() && fixed.size() != np)
            throw invalid_params("FitProblem: fixed flags size mismatch");
        std::size_t nfree = np;
        if (!fixed.empty())
            nfree = std::size_t(std::count(fixed.begin(), fixed.end(), false));
        if (x.size() < nfree + 1)
            throw invalid_params("FitProblem: need at least n_free + 1 data points");
    }
};

struct FitResult {
    std::vector<double> params;
    std::vector<double> sigmas;                     // 1-sigma from chi2 curvature
    std::vector<std::vector<double>> covariance;    // full parameter order
    std::vector<double> residuals;                  // (y - f)/sigma at optimum
    double chi2 = 0;
    int dof = 0;
    double chi2_per_dof = 0;
    int iterations = 0;
    bool converged = false;
    std::string termination;
    bool degenerate = false;
    std::string degenerate_note;
};

namespace detail {

// Cholesky solve of (A + lambda diag(A)) x = b; returns false if not SPD.
inline bool cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t n,
                           double lambda, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] *= (1.0 + lambda);
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) sum -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (!(sum > 0)) return false;
                l[i * n + i] = std::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l[i * n + k] * b[k];
        b[i] = sum / l[i * n + i];
    }
    out.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double sum = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) sum -= l[k * n + ii] * out[k];
        out[ii] = sum / l[ii * n + ii];
    }
    return true;
}

// Jacobi eigendecomposition of a symmetric matrix (tiny n).
inline void jacobi_eigen(std::vector<double> a, std::size_t n, std::vector<double>& eigval,
                         std::vector<double>& eigvec) {
    eigvec.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eigvec[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p * n + q]) < 1e-300) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * a[p * n + q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = eigvec[k * n + p], vkq = eigvec[k * n + q];
                    eigvec[k * n + p] = c * vkp - s * vkq;
                    eigvec[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    eigval.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eigval[i] = a[i * n + i];
}

}  // namespace detail

inline FitResult fit(const FitProblem& prob) {
    prob.validate();
    const FitModel& model = *prob.model;
    const std::size_t np = model.n_params();
    const std::size_t nd = prob.x.size();

    std::vector<double> lower = prob.lower, upper = prob.upper;
    if (lower.empty()) {
        for (const auto& ps : model.param_specs()) lower.push_back(ps.lower);
    }
    if (upper.empty()) {
        for (const auto& ps : model.param_specs()) upper.push_back(ps.upper);
    }
    std::vector<bool> fixed = prob.fixed;
    if (fixed.empty()) fixed.assign(np, false);

    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < np; ++i)
        if (!fixed[i]) free_idx.push_back(i);
    const std::size_t nf = free_idx.size();

    auto clamp_params = [&](std::vector<double>& p) {
        for (std::size_t i = 0; i < np; ++i) p[i] = std::clamp(p[i], lower[i], upper[i]);
    };

    auto kind_of = [&](std::size_t i) { return prob.kind.empty() ? 0 : prob.kind[i]; };

    auto chi2_of = [&](const std::vector<double>& p) {
        double c = 0;
        for (std::size_t i = 0; i < nd; ++i) {
            const double r = (prob.y[i] - model.eval(prob.x[i], p, kind_of(i))) / prob.sigma_y[i];
            c += r * r;
        }
        return c;
    };

    std::vector<double> p = prob.init;
    clamp_params(p);
    double chi2 = chi2_of(p);

    FitResult res;
    res.termination = "max iterations";
    const int max_iter = 500;
    double lambda = 1e-3;
    std::vector<double> jtj(nf * nf), jtr(nf), gradbuf(np), step;

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        std::fill(jtj.begin(), jtj.end(), 0.0);
        std::fill(jtr.begin(), jtr.end(), 0.0);
        for (std::size_t i = 0; i < nd; ++i) {
            const double f = model.eval(prob.x[i], p, kind_of(i));
            model.grad(prob.x[i], p, kind_of(i), gradbuf);
            const double w = 1.0 / prob.sigma_y[i];
            const double r = (prob.y[i] - f) * w;
            for (std::size_t a = 0; a < nf; ++a) {
                const double ja = gradbuf[free_idx[a]] * w;
                jtr[a] += ja * r;
                for (std::size_t b = a; b < nf; ++b)
                    jtj[a * nf + b] += ja * gradbuf[free_idx[b]] * w;
            }
        }
        for (std::size_t a = 0; a < nf; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj[a * nf + b] = jtj[b * nf + a];

        bool accepted = false;
        while (lambda <= 1e14) {
            if (!detail::cholesky_solve(jtj, jtr, nf, lambda, step)) {
                lambda *= 10;
                continue;
            }
            std::vector<double> trial = p;
            double step_norm2 = 0, p_norm2 = 0;
            for (std::size_t a = 0; a < nf; ++a) {
                trial[free_idx[a]] += step[a];
                step_norm2 += step[a] * step[a];
                p_norm2 += p[free_idx[a]] * p[free_idx[a]];
            }
            clamp_params(trial);
            if (std::sqrt(step_norm2) < 1e-10 * (std::sqrt(p_norm2) + 1e-30)) {
                res.termination = "parameter step below tolerance";
                res.converged = true;
                accepted = false;
                break;
            }
            const double trial_chi2 = chi2_of(trial);
            if (trial_chi2 < chi2) {
                const double rel = (chi2 - trial_chi2) / std::max(chi2, 1e-300);
                p = trial;
                chi2 = trial_chi2;
                lambda = std::max(lambda / 3.0, 1e-14);
                accepted = true;
                if (rel < 1e-10) {
                    res.termination = "relative chi2 change below tolerance";
                    res.converged = true;
                }
                break;
            }
            lambda *= 5;
        }
        if (lambda > 1e14) {
            res.termination = "damping overflow (no descent direction)";
            res.converged = true;  // cannot improve further
            break;
        }
        if (res.converged) break;
        if (!accepted) break;
    }
    res.iterations = iter;
    if (iter >= max_iter) {
        res.converged = false;
        res.termination = "max iterations";
    }

    // curvature, covariance and identifiability at the optimum
    std::fill(jtj.begin(), jtj.end(), 0.0);
    res.residuals.resize(nd);
    for (std::size_t i = 0; i < nd; ++i) {
        const double f = model.eval(prob.x[i], p, kind_of(i));
        model.grad(prob.x[i], p, kind_of(i), gradbuf);
        const double w = 1.0 / prob.sigma_y[i];
        res.residuals[i] = (prob.y[i] - f) * w;
        for (std::size_t a = 0; a < nf; ++a)
            for (std::size_t b = a; b < nf; ++b)
                jtj[a * nf + b] += gradbuf[free_idx[a]] * gradbuf[free_idx[b]] * w * w;
    }
    for (std::size_t a = 0; a < nf; ++a)
        for (std::size_t b = 0; b < a; ++b) jtj[a * nf + b] = jtj[b * nf + a];

    std::vector<double> eigval, eigvec;
    if (nf > 0) detail::jacobi_eigen(jtj, nf, eigval, eigvec);
    double eig_max = 0;
    for (std::size_t i = 0; i < nf; ++i) eig_max = std::max(eig_max, eigval[i]);
    const double eig_floor = eig_max * 1e-12;

    res.covariance.assign(np, std::vector<double>(np, 0.0));
    res.sigmas.assign(np, 0.0);
    std::vector<bool> in_null(nf, false);
    for (std::size_t k = 0; k < nf; ++k) {
        if (eigval[k] > eig_floor) continue;
        res.degenerate = true;
        std::string dir;
        for (std::size_t a = 0; a < nf; ++a) {
            if (std::abs(eigvec[a * nf + k]) > 0.3) {
                in_null[a] = true;
                if (!dir.empty()) dir += ", ";
                dir += model.param_specs()[free_idx[a]].name;
            }
        }
        if (!res.degenerate_note.empty()) res.degenerate_note += "; ";
        res.degenerate_note += "unidentifiable parameter combination: {" + dir + "}";
    }
    for (std::size_t a = 0; a < nf; ++a) {
        for (std::size_t b = 0; b < nf; ++b) {
            double c = 0;
            for (std::size_t k = 0; k < nf; ++k) {
                if (eigval[k] <= eig_floor) continue;  // pseudo-inverse
                c += eigvec[a * nf + k] * eigvec[b * nf + k] / eigval[k];
            }
            res.covariance[free_idx[a]][free_idx[b]] = c;
        }
    }
    for (std::size_t a = 0; a < nf; ++a) {
        const std::size_t i = free_idx[a];
        res.sigmas[i] = in_null[a] ? std::numeric_limits<double>::infinity()
                                   : std::sqrt(std::max(res.covariance[i][i], 0.0));
    }

    res.params = p;
    res.chi2 = chi2;
    res.dof = int(nd) - int(nf);
    res.chi2_per_dof = res.dof > 0 ? chi2 / res.dof : 0.0;
    return res;
}

}  // namespace antibunch
