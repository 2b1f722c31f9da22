#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace antibunch {

inline constexpr double inv_sqrt_pi = 0.5641895835477563;  // 1/sqrt(pi)
inline constexpr double sqrt2 = 1.4142135623730951;

// Scaled complementary error function erfcx(x) = exp(x^2) erfc(x).
// exp(x^2)*erfc(x) is well conditioned for small x; from x = 6 on the
// asymptotic series converges below double precision before it starts to
// diverge. Negative arguments via the reflection
// erfcx(-x) = 2 exp(x^2) - erfcx(x).
inline double erfcx(double x) {
    if (x < 0) {
        double e = 2.0 * std::exp(x * x);  // overflows to inf for x < -26.6
        return e - erfcx(-x);
    }
    if (x < 6.0) return std::exp(x * x) * std::erfc(x);
    // 1/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!!/(2x^2)^k, summed until the
    // terms stop improving
    const double ix2 = 0.5 / (x * x);
    double mag = 1.0, sum = 1.0;
    int sign = 1;
    for (int k = 1; k < 64; ++k) {
        const double next = mag * ix2 * double(2 * k - 1);
        if (next >= mag) break;  // series turned divergent
        mag = next;
        sign = -sign;
        sum += sign * mag;
        if (mag < 1e-18 * sum) break;
    }
    return inv_sqrt_pi / x * sum;
}

namespace detail {

// A(t) = exp(-u^2) * erfcx(a - u) with a = sigma/(sqrt(2) T), u = t/(sqrt(2) sigma),
// evaluated without overflow. This is the building block of every
// exponential (x) Gaussian closed form below:
//   conv[exp(-|t|/T)](t)      = (A(t) + A(-t)) / 2
//   conv[theta(t) exp(-t/T)]  =  A(t) / 2
inline double exp_gauss_block(double a, double u) {
    const double q = a - u;
    if (q >= 0) return std::exp(-u * u) * erfcx(q);
    // reflected branch: a^2 - 2 a u = sigma^2/(2T^2) - t/T stays bounded here
    return 2.0 * std::exp(a * a - 2.0 * a * u) - std::exp(-u * u) * erfcx(-q);
}

// d/da of exp(-u^2) erfcx(a-u); erfcx'(x) = 2x erfcx(x) - 2/sqrt(pi)
inline double exp_gauss_block_da(double a, double u) {
    const double A = exp_gauss_block(a, u);
    return 2.0 * (a - u) * A - 2.0 * inv_sqrt_pi * std::exp(-u * u);
}

// d^2/da^2; erfcx''(x) = (2 + 4x^2) erfcx(x) - 4x/sqrt(pi)
inline double exp_gauss_block_daa(double a, double u) {
    const double A = exp_gauss_block(a, u);
    const double q = a - u;
    return (2.0 + 4.0 * q * q) * A - 4.0 * q * inv_sqrt_pi * std::exp(-u * u);
}

}  // namespace detail

// conv[exp(-|t|/T)](t) with a Gaussian of std dev sigma.
inline double exp_abs_gauss(double t, double tdecay, double sigma) {
    if (sigma <= 0) return std::exp(-std::abs(t) / tdecay);
    const double a = sigma / (sqrt2 * tdecay);
    const double u = t / (sqrt2 * sigma);
    return 0.5 * (detail::exp_gauss_block(a, u) + detail::exp_gauss_block(a, -u));
}

// d/dT of exp_abs_gauss
inline double exp_abs_gauss_dT(double t, double tdecay, double sigma) {
    const double at = std::abs(t);
    if (sigma <= 0) return std::exp(-at / tdecay) * at / (tdecay * tdecay);
    const double a = sigma / (sqrt2 * tdecay);
    const double u = t / (sqrt2 * sigma);
    const double da_dT = -a / tdecay;
    return 0.5 * da_dT *
           (detail::exp_gauss_block_da(a, u) + detail::exp_gauss_block_da(a, -u));
}

// conv[|t| exp(-|t|/T)](t); equals -d/d(lambda) of conv[exp(-lambda |t|)] at
// lambda = 1/T, and d/d(lambda) = (sigma/sqrt(2)) d/da.
inline double texp_abs_gauss(double t, double tdecay, double sigma) {
    if (sigma <= 0) return std::abs(t) * std::exp(-std::abs(t) / tdecay);
    const double a = sigma / (sqrt2 * tdecay);
    const double u = t / (sqrt2 * sigma);
    const double s = sigma / sqrt2;
    return -0.5 * s *
           (detail::exp_gauss_block_da(a, u) + detail::exp_gauss_block_da(a, -u));
}

// d/dT of texp_abs_gauss
inline double texp_abs_gauss_dT(double t, double tdecay, double sigma) {
    const double at = std::abs(t);
    if (sigma <= 0) return std::exp(-at / tdecay) * at * at / (tdecay * tdecay);
    const double a = sigma / (sqrt2 * tdecay);
    const double u = t / (sqrt2 * sigma);
    const double s = sigma / sqrt2;
    const double da_dT = -a / tdecay;
    return -0.5 * s * da_dT *
           (detail::exp_gauss_block_daa(a, u) + detail::exp_gauss_block_daa(a, -u));
}

// conv[theta(t) exp(-t/T)](t): the exponentially modified Gaussian.
inline double exp_step_gauss(double t, double tdecay, double sigma) {
    if (sigma <= 0) return t < 0 ? 0.0 : std::exp(-t / tdecay);
    const double a = sigma / (sqrt2 * tdecay);
    const double u = t / (sqrt2 * sigma);
    return 0.5 * detail::exp_gauss_block(a, u);
}

// d/dT of exp_step_gauss
inline double exp_step_gauss_dT(double t, double tdecay, double sigma) {
    if (sigma <= 0)
        return t < 0 ? 0.0 : std::exp(-t / tdecay) * t / (tdecay * tdecay);
    const double a = sigma / (sqrt2 * tdecay);
    const double u = t / (sqrt2 * sigma);
    const double da_dT = -a / tdecay;
    return 0.5 * da_dT * detail::exp_gauss_block_da(a, u);
}

class quadrature_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    if (depth <= 0)
        throw quadrature_error("adaptive Simpson failed to converge on [" +
                               std::to_string(a) + ", " + std::to_string(b) + "]");
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
inline double integrate_adaptive(const std::function<double(double)>& f, double a,
                                 double b, double tol = 1e-10, int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = detail::simpson(a, b, fa, fm, fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace antibunch
