#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "error.hpp"

namespace leff {

inline constexpr double euler_gamma() { return std::numbers::egamma; }

// Principal branch of Lambert W, Halley iteration.
inline double lambert_w0(double x) {
    if (!(x >= 0.0)) throw DomainError("lambert_w0: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;
    double w;
    if (x < 1.0) {
        w = x / (1.0 + x);  // exact to O(x^2)... good start below 1
    } else if (x < 10.0) {
        w = std::log1p(x) * 0.75;
    } else {
        double l1 = std::log(x), l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    for (int it = 0; it < 100; ++it) {
        double ew = std::exp(w);
        double f = w * ew - x;
        double wp1 = w + 1.0;
        double dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if (std::fabs(dw) <= 4 * std::numeric_limits<double>::epsilon() * std::fabs(w)) break;
    }
    return w;
}

struct CouplingAlpha {
    double value;
    double B;
    double c = 2.0;

    double residual() const {
        return value - (2.0 / c) * std::log(std::sqrt(B) / value);
    }
};

namespace detail {

// Safeguarded Newton on an increasing function f with bracket [lo, hi].
template <class F, class DF>
double newton_bisect(F f, DF df, double lo, double hi, double tol = 1e-15) {
    double flo = f(lo), fhi = f(hi);
    if (flo > 0 || fhi < 0) throw AccuracyError("newton_bisect: bracket does not contain a root");
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 300; ++it) {
        double fx = f(x);
        if (fx == 0.0) return x;
        if (fx < 0) lo = x; else hi = x;
        double xn = x - fx / df(x);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) <= tol * std::fabs(xn)) return xn;
        x = xn;
        if (hi - lo <= tol * std::fabs(x)) return x;
    }
    return x;
}

}  // namespace detail

// alpha = (2/c) log(sqrt(B)/alpha), parametrized by log B so huge fields stay finite
inline double alpha_c_log(double c, double lb) {
    if (!(c > 0.0)) throw DomainError("alpha_c: c must be positive");
    if (!std::isfinite(lb)) throw DomainError("alpha_c: B must be positive and finite");
    auto f = [&](double a) { return a + (2.0 / c) * std::log(a) - lb / c; };
    auto df = [&](double a) { return 1.0 + (2.0 / c) / a; };
    // bracket around (1/c) log B - (2/c) log log B
    double lo, hi;
    if (lb > std::exp(1.0)) {
        double g = lb / c;
        lo = std::max(1e-12, g - (2.0 / c) * std::log(lb) - 1.0);
        hi = g + 1.0;
    } else {
        lo = 1e-12;
        hi = std::max(1.0, lb / c + 1.0);
    }
    while (f(lo) > 0) lo *= 1e-3;
    while (f(hi) < 0) hi *= 2.0;
    return detail::newton_bisect(f, df, lo, hi);
}

inline CouplingAlpha alpha_c(double c, double B) {
    if (!(B > 0.0) || std::isinf(B)) throw DomainError("alpha_c: B must be positive and finite");
    return {alpha_c_log(c, std::log(B)), B, c};
}

// Unique positive solution of alpha + log alpha = (1/2) log B.
inline CouplingAlpha alpha_of_B(double B) {
    if (!(B > 0.0)) throw DomainError("alpha_of_B: B must be positive");
    return alpha_c(2.0, B);
}

inline double alpha(double B) { return alpha_of_B(B).value; }

inline double alpha_from_log(double logB) { return alpha_c_log(2.0, logB); }

inline double gamma_fn(double x) {
    if (!(x > 0.0)) throw DomainError("gamma_fn: x must be positive");
    return std::tgamma(x);
}

inline double digamma(double x) {
    if (!(x > 0.0)) throw DomainError("digamma: x must be positive");
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    double r = 1.0 / (x * x);
    // asymptotic series, Bernoulli coefficients
    double s = r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12.0))))));
    return acc + std::log(x) - 0.5 / x - s;
}

namespace detail {

inline double k0_series(double x) {
    // K0 = -(log(x/2) + gamma) I0 + sum (x^2/4)^k/(k!)^2 H_k
    const double y = 0.25 * x * x;
    double term = 1.0, i0 = 1.0, rest = 0.0, hk = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= y / (double(k) * k);
        hk += 1.0 / k;
        i0 += term;
        rest += term * hk;
        if (term * hk < 1e-17 * rest) break;
    }
    return -(std::log(0.5 * x) + euler_gamma()) * i0 + rest;
}

// Steed's continued fraction for K0 (Temme), accurate for x >= 2.
inline double k0_cf(double x) {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    double a1 = 0.25;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i < 10000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        double dels = q * delh;
        s += dels;
        if (std::fabs(dels / s) < 1e-17) break;
    }
    return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
}

}  // namespace detail

inline double bessel_k0(double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k0: x must be positive");
    if (std::isinf(x)) return 0.0;
    return x <= 2.0 ? detail::k0_series(x) : detail::k0_cf(x);
}

}  // namespace leff
