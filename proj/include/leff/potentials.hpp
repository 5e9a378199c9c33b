#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cache.hpp"
#include "error.hpp"
#include "landau.hpp"
#include "quadrature.hpp"
#include "specialfn.hpp"

namespace leff {

using HermitianMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

inline bool is_hermitian(const HermitianMatrix& A, double tol = 1e-12) {
    return A.rows() == A.cols() && (A - A.adjoint()).cwiseAbs().maxCoeff() <= tol * (1.0 + A.cwiseAbs().maxCoeff());
}

inline double op_norm(const RealMatrix& A) {
    if (A.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct Basis {
    int N = 1;
    int M = 0;
    std::vector<Tuple> tuples;
    std::map<Tuple, int> index;

    Basis() = default;
    Basis(int n, int m) : N(n), M(m), tuples(enumerate_sigma(n, m)) {
        for (size_t i = 0; i < tuples.size(); ++i) index[tuples[i]] = static_cast<int>(i);
    }
    int dim() const { return static_cast<int>(tuples.size()); }
};

inline std::string tuple_str(const Tuple& t) {
    std::string s;
    for (size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
    return s;
}

// ---- one-dimensional radial expectations --------------------------------
//
// With s = rho^2/2 (B = 1), |chi_m|^2 d^2r = w_m(s) ds, w_m(s) = s^m e^{-s}/m!.

namespace detail {

inline double log_weight(int m, double s) {
    if (s <= 0.0) return m == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return m * std::log(s) - s - std::lgamma(m + 1.0);
}

struct QuadResult {
    double value;
    double error;
};

// integral of f(s) w_m(s) over (0, inf) with optional interior breakpoints
template <class F>
QuadResult radial_integral(F f, int m, std::vector<double> bps = {}) {
    auto g = [&](double s) {
        double lw = log_weight(m, s);
        if (lw < -745.0) return 0.0;
        return f(s) * std::exp(lw);
    };
    const double peak = std::max(1.0, static_cast<double>(m));
    const double w = std::sqrt(peak);
    bps.push_back(std::max(1.0, peak - 4 * w));
    bps.push_back(peak + 8 * w);
    std::vector<double> pts{0.0};
    for (double b : bps)
        if (b > 0.0 && std::isfinite(b)) pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(), [](double a, double b) { return std::fabs(a - b) <= 1e-14 * std::max(1.0, b); }), pts.end());
    double v = 0.0, e = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        double err = 0.0;
        v += integrate(g, pts[i], pts[i + 1], 1e-15, &err);
        e += std::fabs(err);
    }
    double err = 0.0;
    v += integrate_to_inf(g, pts.back(), 1e-15, &err);
    e += std::fabs(err);
    return {v, e};
}

inline double checked(const QuadResult& r, const char* what) {
    if (!std::isfinite(r.value) || r.error > 1e-8 * std::max(1.0, std::fabs(r.value)))
        throw AccuracyError(std::string(what) + ": quadrature error estimate exceeds 1e-8");
    return r.value;
}

// K0(x) + log(x/2) + gamma, free of cancellation for small x.
inline double k0_remainder(double x) {
    if (x > 2.0) return bessel_k0(x) + std::log(0.5 * x) + euler_gamma();
    const double y = 0.25 * x * x;
    double term = 1.0, i0m1 = 0.0, rest = 0.0, hk = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= y / (double(k) * k);
        hk += 1.0 / k;
        i0m1 += term;
        rest += term * hk;
        if (term * hk < 1e-18 * std::fabs(rest)) break;
    }
    return -(std::log(0.5 * x) + euler_gamma()) * i0m1 + rest;
}

// Radial functions g(a) of the transverse distance; rho = scale * sqrt(2 s).
// Single particle: scale 1. Pair (relative coordinate u): scale sqrt 2.
enum class Radial { InvDist, Fourier, FourierRemainder, NegLogQuarter, AbsLog, CellInvDist };

inline const char* radial_name(Radial k) {
    switch (k) {
        case Radial::InvDist: return "V";
        case Radial::Fourier: return "FV";
        case Radial::FourierRemainder: return "FVrem";
        case Radial::NegLogQuarter: return "C";
        case Radial::AbsLog: return "abslog";
        case Radial::CellInvDist: return "Vcell";
    }
    return "?";
}

inline double radial_value(Radial kind, bool pair, int m, double arg, double arg2 = 0.0) {
    const double sc2 = pair ? 2.0 : 1.0;  // rho^2 = sc2 * 2 s
    switch (kind) {
        case Radial::InvDist: {
            const double z2 = arg * arg;
            auto f = [&](double s) { return 1.0 / std::sqrt(2.0 * sc2 * s + z2); };
            return checked(radial_integral(f, m, {z2 / (2.0 * sc2)}), "position potential");
        }
        case Radial::CellInvDist: {
            // integral over t in [arg, arg2] of (rho^2 + t^2)^{-1/2}
            auto f = [&](double s) {
                double r = std::sqrt(2.0 * sc2 * s);
                if (r == 0.0) return 0.0;
                return std::asinh(arg2 / r) - std::asinh(arg / r);
            };
            double zm = std::max(std::fabs(arg), std::fabs(arg2));
            double zn = (arg <= 0.0 && arg2 >= 0.0) ? 0.0 : std::min(std::fabs(arg), std::fabs(arg2));
            std::vector<double> bps{zm * zm / (2.0 * sc2)};
            if (zn > 0.0) bps.push_back(zn * zn / (2.0 * sc2));
            if (m == 0 && zn == 0.0) {
                // log singularity of asinh at s = 0 is integrable
            }
            return checked(radial_integral(f, m, bps), "cell potential");
        }
        case Radial::Fourier: {
            const double z = std::fabs(arg);
            auto f = [&](double s) {
                double x = std::sqrt(2.0 * sc2 * s) * z;
                return x <= 0.0 ? 0.0 : 2.0 * bessel_k0(x);
            };
            // the s = 0 log singularity is handled by tanh-sinh
            return checked(radial_integral(f, m, {1.0 / (2.0 * sc2 * z * z)}), "fourier potential");
        }
        case Radial::FourierRemainder: {
            const double z = std::fabs(arg);
            auto f = [&](double s) {
                double x = std::sqrt(2.0 * sc2 * s) * z;
                return x <= 0.0 ? 0.0 : 2.0 * k0_remainder(x);
            };
            return checked(radial_integral(f, m, {1.0 / (2.0 * sc2 * z * z)}), "fourier remainder");
        }
        case Radial::NegLogQuarter: {
            auto f = [&](double s) { return -std::log(sc2 * 2.0 * s / 4.0); };
            return checked(radial_integral(f, m), "log constant");
        }
        case Radial::AbsLog: {
            auto f = [&](double s) { return std::fabs(0.5 * std::log(sc2 * 2.0 * s)); };
            return checked(radial_integral(f, m, {0.5 / sc2}), "abs log");
        }
    }
    return 0.0;
}

inline double radial_cached(Radial kind, bool pair, int m, double arg, double arg2 = 0.0) {
    std::string op = std::string(radial_name(kind)) + (pair ? "pair" : "single");
    std::string key = ElementCache::key(op, std::to_string(m), std::to_string(m), arg);
    if (kind == Radial::CellInvDist) {
        char buf[48];
        std::snprintf(buf, sizeof buf, ",%.17g", arg2);
        key += buf;
    }
    return active_cache().get_or_compute(key, [&] { return CachedValue{radial_value(kind, pair, m, arg, arg2), 0.0, 0.0}; });
}

}  // namespace detail

// Expansion of chi_{m1}(r_j) chi_{m2}(r_k) in chi_a(u) chi_{S-a}(v) with
// u = (r_j - r_k)/sqrt2, v = (r_j + r_k)/sqrt2; real orthogonal in (m1, a).
inline std::vector<double> pair_rotation_row(int m1, int m2) {
    const int S = m1 + m2;
    std::vector<double> T(S + 1, 0.0);
    for (int a = 0; a <= S; ++a) {
        double c = 0.0;
        for (int p = std::max(0, a - m2); p <= std::min(a, m1); ++p) {
            int q = a - p;
            c += binomial(m1, p) * binomial(m2, q) * ((q % 2) ? -1.0 : 1.0);
        }
        double lognorm = 0.5 * (std::lgamma(a + 1.0) + std::lgamma(S - a + 1.0) - std::lgamma(m1 + 1.0) - std::lgamma(m2 + 1.0)) - 0.5 * S * std::log(2.0);
        T[a] = c * std::exp(lognorm);
    }
    return T;
}

// Matrix of a function of rho_j on F_M: diagonal with entries g(m_j).
template <class G>
RealMatrix assemble_single(const Basis& b, int j, G g) {
    if (j < 0 || j >= b.N) throw DomainError("single-particle index out of range");
    RealMatrix A = RealMatrix::Zero(b.dim(), b.dim());
    for (int i = 0; i < b.dim(); ++i) A(i, i) = g(b.tuples[i][j]);
    return A;
}

// Matrix of a function of rho_jk on F_M: sum_a T_{(mj,mk),a} T_{(m'j,m'k),a} g(a).
template <class G>
RealMatrix assemble_pair(const Basis& b, int j, int k, G g) {
    if (b.N < 2) throw DomainError("pair operator needs N >= 2");
    if (j < 0 || k < 0 || j >= b.N || k >= b.N || j == k) throw DomainError("pair indices out of range");
    const int d = b.dim();
    RealMatrix A = RealMatrix::Zero(d, d);
    std::map<int, double> gval;
    auto gv = [&](int a) {
        auto it = gval.find(a);
        if (it == gval.end()) it = gval.emplace(a, g(a)).first;
        return it->second;
    };
    for (int r = 0; r < d; ++r) {
        const Tuple& t = b.tuples[r];
        auto Tr = pair_rotation_row(t[j], t[k]);
        for (int c = r; c < d; ++c) {
            const Tuple& u = b.tuples[c];
            bool same = true;
            for (int i = 0; i < b.N; ++i)
                if (i != j && i != k && t[i] != u[i]) same = false;
            if (!same || t[j] + t[k] != u[j] + u[k]) continue;
            auto Tc = pair_rotation_row(u[j], u[k]);
            double v = 0.0;
            for (size_t a = 0; a < Tr.size(); ++a) v += Tr[a] * Tc[a] * gv(static_cast<int>(a));
            A(r, c) = A(c, r) = v;
        }
    }
    return A;
}

inline HermitianMatrix to_complex(const RealMatrix& A) { return A.cast<std::complex<double>>(); }

// sqrt(B) V^1_j(sqrt(B) z): projected (rho_j^2 + z^2)^{-1/2}.
inline RealMatrix V_single_real(const ProblemParams& p, double z, int j = 0) {
    Basis b(p.N, p.M);
    const double sb = std::sqrt(p.B);
    return sb * assemble_single(b, j, [&](int m) { return detail::radial_cached(detail::Radial::InvDist, false, m, std::fabs(sb * z)); });
}

inline HermitianMatrix position_V_single(const ProblemParams& p, double z, int j = 0) {
    p.validate();
    return to_complex(V_single_real(p, z, j));
}

inline RealMatrix V_pair_real(const ProblemParams& p, int j, int k, double z) {
    Basis b(p.N, p.M);
    const double sb = std::sqrt(p.B);
    return sb * assemble_pair(b, j, k, [&](int a) { return detail::radial_cached(detail::Radial::InvDist, true, a, std::fabs(sb * z)); });
}

inline HermitianMatrix position_V_pair(const ProblemParams& p, int j, int k, double z) {
    p.validate();
    return to_complex(V_pair_real(p, j, k, z));
}

// Integral of the B-scaled single-particle potential over [a, b] (cell averages for grids).
inline RealMatrix cell_integral_V_single(const ProblemParams& p, double a, double b, int j = 0) {
    Basis bs(p.N, p.M);
    const double sb = std::sqrt(p.B);
    return assemble_single(bs, j, [&](int m) { return detail::radial_cached(detail::Radial::CellInvDist, false, m, sb * a, sb * b); });
}

// Fourier transforms (B = 1 normalization): 2 Pi K0(rho |zeta|) Pi.
inline RealMatrix FV_single_real(const ProblemParams& p, double zeta, int j = 0) {
    if (zeta == 0.0) throw DomainError("fourier_V_single: logarithmic singularity at zeta = 0");
    Basis b(p.N, p.M);
    return assemble_single(b, j, [&](int m) { return detail::radial_cached(detail::Radial::Fourier, false, m, std::fabs(zeta)); });
}

inline HermitianMatrix fourier_V_single(const ProblemParams& p, double zeta, int j = 0) {
    p.validate();
    return to_complex(FV_single_real(p, zeta, j));
}

inline RealMatrix FV_pair_real(const ProblemParams& p, int j, int k, double zeta) {
    if (zeta == 0.0) throw DomainError("fourier_V_pair: logarithmic singularity at zeta = 0");
    Basis b(p.N, p.M);
    return assemble_pair(b, j, k, [&](int a) { return detail::radial_cached(detail::Radial::Fourier, true, a, std::fabs(zeta)); });
}

inline HermitianMatrix fourier_V_pair(const ProblemParams& p, int j, int k, double zeta) {
    p.validate();
    return to_complex(FV_pair_real(p, j, k, zeta));
}

// e(zeta) = FV(zeta) + 2 log|zeta| + 2 gamma - C, evaluated without cancellation.
inline RealMatrix fourier_remainder_single(const ProblemParams& p, double zeta, int j = 0) {
    if (zeta == 0.0) return RealMatrix::Zero(Basis(p.N, p.M).dim(), Basis(p.N, p.M).dim());
    Basis b(p.N, p.M);
    return assemble_single(b, j, [&](int m) { return detail::radial_cached(detail::Radial::FourierRemainder, false, m, std::fabs(zeta)); });
}

inline RealMatrix fourier_remainder_pair(const ProblemParams& p, int j, int k, double zeta) {
    Basis b(p.N, p.M);
    if (zeta == 0.0) return RealMatrix::Zero(b.dim(), b.dim());
    return assemble_pair(b, j, k, [&](int a) { return detail::radial_cached(detail::Radial::FourierRemainder, true, a, std::fabs(zeta)); });
}

// C^n_j = -Pi log(rho_j^2/4) Pi and C^e_jk = -Pi log(rho_jk^2/4) Pi (B = 1).
inline RealMatrix Cn_real(const ProblemParams& p, int j = 0) {
    Basis b(p.N, p.M);
    return assemble_single(b, j, [&](int m) { return detail::radial_cached(detail::Radial::NegLogQuarter, false, m, 0.0); });
}

inline HermitianMatrix constant_Cn(const ProblemParams& p, int j = 0) {
    p.validate();
    return to_complex(Cn_real(p, j));
}

inline RealMatrix Ce_real(const ProblemParams& p, int j, int k) {
    Basis b(p.N, p.M);
    return assemble_pair(b, j, k, [&](int a) { return detail::radial_cached(detail::Radial::NegLogQuarter, true, a, 0.0); });
}

inline HermitianMatrix constant_Ce(const ProblemParams& p, int j, int k) {
    p.validate();
    return to_complex(Ce_real(p, j, k));
}

// Closed form of the C^n diagonal: log 2 - psi(m_j + 1).
inline double Cn_closed_form(int m) { return std::numbers::ln2 - digamma(m + 1.0); }

// ---- distributional potentials -------------------------------------------

enum class PlaneKind { Nucleus, Pair };

struct Hyperplane {
    PlaneKind kind;
    int j = 0;
    int k = -1;
    RealMatrix pf_coeff;
    RealMatrix delta_coeff;
};

struct DistributionPotential1D {
    int N = 1;
    int dim = 1;
    std::vector<Hyperplane> planes;
};

inline DistributionPotential1D assemble_vC(const ProblemParams& p) {
    p.validate();
    Basis b(p.N, p.M);
    const int d = b.dim();
    const RealMatrix I = RealMatrix::Identity(d, d);
    const double lb = std::log(p.B);
    DistributionPotential1D v{p.N, d, {}};
    for (int j = 0; j < p.N; ++j) v.planes.push_back({PlaneKind::Nucleus, j, -1, -p.Z * I, -p.Z * (lb * I + Cn_real(p, j))});
    for (int j = 0; j < p.N; ++j)
        for (int k = j + 1; k < p.N; ++k) v.planes.push_back({PlaneKind::Pair, j, k, I, lb * I + Ce_real(p, j, k)});
    return v;
}

inline DistributionPotential1D assemble_vdelta(const ProblemParams& p) {
    p.validate();
    Basis b(p.N, p.M);
    const int d = b.dim();
    const RealMatrix I = RealMatrix::Identity(d, d);
    const RealMatrix O = RealMatrix::Zero(d, d);
    const double a = alpha(p.B);
    DistributionPotential1D v{p.N, d, {}};
    for (int j = 0; j < p.N; ++j) v.planes.push_back({PlaneKind::Nucleus, j, -1, O, -2.0 * a * p.Z * I});
    for (int j = 0; j < p.N; ++j)
        for (int k = j + 1; k < p.N; ++k) v.planes.push_back({PlaneKind::Pair, j, k, O, 2.0 * a * I});
    return v;
}

struct MatrixPotential1D {
    enum class Kind { SingleParticle, Pair } kind = Kind::SingleParticle;
    int j = 0, k = -1;
    Basis basis;
    std::function<RealMatrix(double)> evaluate;
};

inline MatrixPotential1D make_V_single(const ProblemParams& p, int j = 0) {
    return {MatrixPotential1D::Kind::SingleParticle, j, -1, Basis(p.N, p.M), [p, j](double z) { return V_single_real(p, z, j); }};
}

inline MatrixPotential1D make_V_pair(const ProblemParams& p, int j, int k) {
    return {MatrixPotential1D::Kind::Pair, j, k, Basis(p.N, p.M), [p, j, k](double z) { return V_pair_real(p, j, k, z); }};
}

// ---- numerical constants -------------------------------------------------

// ((1/4pi) int (|log|eta|| + 2)^2/(eta^2 + 4) d eta)^{1/2}
inline double constant_C37() {
    auto f = [](double e) {
        double l = std::fabs(std::log(e)) + 2.0;
        return l * l / (e * e + 4.0);
    };
    double a = integrate(f, 0.0, 1.0, 1e-15);
    double b = integrate_to_inf(f, 1.0, 1e-15);
    return std::sqrt(2.0 * (a + b) / (4.0 * std::numbers::pi));
}

// 2 + 2 ||Pi |log rho_1| Pi|| over single-particle modes m <= M.
inline double constant_CV11(const ProblemParams& p) {
    double mx = 0.0;
    for (int m = 0; m <= p.M; ++m) mx = std::max(mx, detail::radial_cached(detail::Radial::AbsLog, false, m, 0.0));
    return 2.0 + 2.0 * mx;
}

namespace detail {
inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return g;
}
}  // namespace detail

// sup_{|zeta|<=1} |FV_1 + 2 log|zeta|| over modes m <= M; logarithmic sampling plus the zeta -> 0 limit.
inline double sup_FV_plus_log(int M, int points = 2000) {
    double s = 0.0;
    for (int m = 0; m <= M; ++m) {
        double lim = std::fabs(Cn_closed_form(m) - 2.0 * euler_gamma());
        s = std::max(s, lim);
        for (double z : detail::log_grid(1e-6, 1.0, points)) {
            double e = detail::radial_cached(detail::Radial::FourierRemainder, false, m, z);
            // FV + 2 log z = e - 2 gamma + C
            s = std::max(s, std::fabs(e - 2.0 * euler_gamma() + Cn_closed_form(m)));
        }
    }
    return s;
}

// sup_{|zeta|>=1} |FV_1|: K0 is decreasing, so the supremum sits at |zeta| = 1.
inline double sup_FV_outside(int M) {
    double s = 0.0;
    for (int m = 0; m <= M; ++m) s = std::max(s, detail::radial_cached(detail::Radial::Fourier, false, m, 1.0));
    return s;
}

inline double constant_C63(const ProblemParams& p, int points = 2000) {
    const double pi = std::numbers::pi, l2 = std::numbers::ln2;
    double a = sup_FV_plus_log(p.M, points);
    double b = sup_FV_outside(p.M);
    return std::sqrt(pi * pi + 9.0 * l2 * l2 + 64.0 * std::sqrt(2.0) / pi + a * a + 8.0 * std::sqrt(2.0) / pi * b * b);
}

// C_v^2 = int_R ||e(zeta)||^2/zeta^2 d zeta for the single or pair form; the
// norm is the largest |eigenvalue|, i.e. the max over radial channels.
// Composite Simpson in log(zeta) on [1e-8, 1e6]; analytic pieces outside.
inline double error_integral_Cv(int M, bool pair, int per_decade = 40) {
    auto norm_e = [&](double z) {
        double mx = 0.0;
        for (int m = 0; m <= M; ++m) mx = std::max(mx, std::fabs(detail::radial_cached(detail::Radial::FourierRemainder, pair, m, z)));
        return mx;
    };
    const double lo = 1e-8, hi = 1e6;
    const int n = 14 * per_decade;  // even
    const double h = std::log(hi / lo) / n;
    double v = 0.0;
    for (int i = 0; i <= n; ++i) {
        double z = lo * std::exp(i * h);
        double e = norm_e(z);
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        v += w * e * e / z;  // f(z) z in the log variable
    }
    v *= h / 3.0;
    // below lo: e ~ c zeta^2 log zeta, integrand ~ c^2 zeta^2 log^2 zeta
    double e0 = norm_e(lo);
    v += e0 * e0 / lo / 3.0;
    // above hi: e = 2 log zeta + c exactly (FV is exponentially small);
    // int_L^inf E(z)^2/z^2 dz = (E^2 + 4E + 8)/L with E = E(L)
    double E = norm_e(hi);
    v += (E * E + 4.0 * E + 8.0) / hi;
    return std::sqrt(2.0 * v);
}

// 2^{1/4} C_v / sqrt(pi), maximized over the single-particle and pair forms.
inline double constant_Casymp(const ProblemParams& p) {
    double cv = error_integral_Cv(p.M, false);
    if (p.N >= 2) cv = std::max(cv, error_integral_Cv(p.M, true));
    return std::pow(2.0, 0.25) * cv / std::sqrt(std::numbers::pi);
}

}  // namespace leff
