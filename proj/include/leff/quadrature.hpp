#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "error.hpp"

namespace leff {

struct Rule {
    std::vector<double> x, w;
};

// Generalized Gauss-Laguerre rule for s^a e^{-s} on (0, inf), Golub-Welsch.
inline Rule gauss_laguerre(int n, double a = 0.0) {
    if (n < 1) throw DomainError("gauss_laguerre: n must be positive");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        J(k, k) = 2.0 * k + a + 1.0;
        if (k + 1 < n) J(k, k + 1) = J(k + 1, k) = std::sqrt((k + 1.0) * (k + 1.0 + a));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    const double mu0 = std::tgamma(a + 1.0);
    for (int k = 0; k < n; ++k) {
        r.x[k] = es.eigenvalues()(k);
        double v = es.eigenvectors()(0, k);
        r.w[k] = mu0 * v * v;
    }
    return r;
}

inline const Rule& gauss_laguerre_cached(int n) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_laguerre(n)).first;
    return it->second;
}

// Adaptive integration on a finite interval (tanh-sinh handles endpoint singularities).
template <class F>
double integrate(F f, double a, double b, double tol = 1e-13, double* err = nullptr) {
    static thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
    double e = 0.0, l1 = 0.0;
    // two-argument form: xc is the signed distance to the nearer endpoint,
    // which keeps evaluations off the endpoints themselves
    auto g = [&](double x, double xc) {
        double t = xc < 0 ? a - xc : (xc > 0 ? b - xc : x);
        return f(t);
    };
    double v = ts.integrate(g, a, b, tol, &e, &l1);
    if (err) *err = e;
    return v;
}

// Adaptive integration on (a, inf).
template <class F>
double integrate_to_inf(F f, double a, double tol = 1e-13, double* err = nullptr) {
    static thread_local boost::math::quadrature::exp_sinh<double> es(12);
    double e = 0.0, l1 = 0.0;
    double v = es.integrate([&](double t) { return f(a + t); }, 0.0, std::numeric_limits<double>::infinity(), tol, &e, &l1);
    if (err) *err = e;
    return v;
}

// Smooth integrand on a finite interval, adaptive Gauss-Kronrod.
template <class F>
double integrate_gk(F f, double a, double b, double tol = 1e-13, double* err = nullptr) {
    double e = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &e);
    if (err) *err = e;
    return v;
}

}  // namespace leff
